#!/usr/bin/env node
/**
 * Headless render entry point.
 *
 * Usage: cyclebench-render [--background] [--] --config config.json
 *
 * --background is accepted as a no-op so callers can use the conventional
 * headless-renderer invocation shape; this renderer never opens a window.
 * Exit codes: 0 success, 1 render/config failure (diagnostic on stderr),
 * 2 usage error.
 */
import * as fs from "fs";
import * as path from "path";
import { loadConfig } from "./config";
import { parseKeyframeDoc } from "./keyframes";
import { renderFrame } from "./render";
import { encodePPM } from "./ppm";

const USAGE = "usage: cyclebench-render [--background] [--] --config <config.json>";

export const main = (argv: string[]): number => {
  let configPath: string | null = null;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--background" || arg === "--") {
      continue;
    }
    if (arg === "--config") {
      if (i + 1 >= argv.length) {
        process.stderr.write(`--config needs a path\n${USAGE}\n`);
        return 2;
      }
      configPath = argv[++i];
      continue;
    }
    if (arg === "--help" || arg === "-h") {
      process.stdout.write(`${USAGE}\n`);
      return 0;
    }
    process.stderr.write(`unknown argument: ${arg}\n${USAGE}\n`);
    return 2;
  }
  if (configPath === null) {
    process.stderr.write(`--config is required\n${USAGE}\n`);
    return 2;
  }

  try {
    const config = loadConfig(configPath);
    const doc = parseKeyframeDoc(fs.readFileSync(config.input, "utf8"));
    const frames =
      config.frames ?? Array.from({ length: doc.frameCount }, (_, i) => i);
    fs.mkdirSync(config.outDir, { recursive: true });
    for (const frame of frames) {
      if (frame > doc.frameCount) {
        throw new Error(`frame ${frame} out of range 0..${doc.frameCount}`);
      }
      const img = renderFrame(doc, frame, {
        width: config.width,
        height: config.height,
        profile: config.profile,
      });
      const name = `frame_${String(frame).padStart(4, "0")}.ppm`;
      fs.writeFileSync(path.join(config.outDir, name), encodePPM(img));
    }
    process.stdout.write(
      `rendered ${frames.length} frame(s) of ${doc.sceneId || config.input} at ` +
        `${config.width}x${config.height} -> ${config.outDir}\n`,
    );
    return 0;
  } catch (err) {
    process.stderr.write(`render failed: ${(err as Error).message}\n`);
    return 1;
  }
};

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
