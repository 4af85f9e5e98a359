/**
 * Render job configuration.
 *
 * JSON shape:
 *   {
 *     "input": "scene.keyframes.json",   // required
 *     "out_dir": "frames",               // required
 *     "width": 1920, "height": 1080,     // default full profile resolution
 *     "frames": [0, 40, 80] | null,      // null renders 0..frame_count-1
 *     "profile": "preview" | "full"      // sampling profile, default preview
 *   }
 *
 * Frame indices may include frame_count itself: the keyframe tracks close the
 * loop at that frame, so rendering it reproduces frame 0 of a cyclic scene.
 */
import * as fs from "fs";
import * as path from "path";
import { Profile } from "./render";

export interface BridgeConfig {
  input: string;
  outDir: string;
  width: number;
  height: number;
  frames: number[] | null;
  profile: Profile;
}

export const loadConfig = (configPath: string): BridgeConfig => {
  let text: string;
  try {
    text = fs.readFileSync(configPath, "utf8");
  } catch (err) {
    throw new Error(`cannot read config ${configPath}: ${(err as Error).message}`);
  }
  let raw: any;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new Error(`config ${configPath} is not valid JSON: ${(err as Error).message}`);
  }
  if (typeof raw !== "object" || raw === null) {
    throw new Error("config must be a JSON object");
  }
  if (typeof raw.input !== "string" || raw.input.length === 0) {
    throw new Error('config: "input" (keyframe document path) is required');
  }
  if (typeof raw.out_dir !== "string" || raw.out_dir.length === 0) {
    throw new Error('config: "out_dir" is required');
  }
  const width = raw.width ?? 1920;
  const height = raw.height ?? 1080;
  if (!Number.isInteger(width) || !Number.isInteger(height) || width <= 0 || height <= 0) {
    throw new Error("config: width and height must be positive integers");
  }
  let frames: number[] | null = null;
  if (raw.frames != null) {
    if (!Array.isArray(raw.frames) || raw.frames.some((f: any) => !Number.isInteger(f) || f < 0)) {
      throw new Error("config: frames must be a list of non-negative integers");
    }
    frames = raw.frames;
  }
  const profile = raw.profile ?? "preview";
  if (profile !== "preview" && profile !== "full") {
    throw new Error(`config: unknown profile "${profile}"`);
  }
  const base = path.dirname(path.resolve(configPath));
  return {
    // relative paths resolve against the config file location
    input: path.resolve(base, raw.input),
    outDir: path.resolve(base, raw.out_dir),
    width,
    height,
    frames,
    profile,
  };
};
