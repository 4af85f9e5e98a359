/**
 * Keyframe document reader.
 *
 * The document is the single source of truth for all animation: every track
 * is a list of [frame, ...values] rows and playback is linear interpolation
 * between adjacent rows. Nothing here recomputes dynamics; it only samples
 * what the exporter wrote.
 *
 * Conventions carried by the document:
 * - position rows are [frame, x, y]; the z coordinate is implied and equals
 *   the interpolated scale at that frame (objects rest on the ground plane).
 * - rotation rows are [frame, degrees] with unwrapped angles, so a spinner
 *   ends at initial + 360 * turns and linear interpolation yields constant
 *   angular speed.
 * - color rows are [frame, r, g, b] in 0..1.
 * - a light with intensity_keyframes null holds its base intensity.
 */
import { Vec3 } from "./vec";

export type KeyRow = number[];

export const SHAPES = ["sphere", "cube", "cylinder", "cone"] as const;
export const MATERIALS = ["metal", "rubber"] as const;

export type Shape = (typeof SHAPES)[number];
export type Material = (typeof MATERIALS)[number];

export interface LightSpec {
  name: string;
  position: Vec3;
  intensity: number;
  intensityKeyframes: KeyRow[] | null;
}

export interface ObjectSpec {
  id: string;
  shape: Shape;
  material: Material;
  meshRef: string;
  position: KeyRow[];
  scale: KeyRow[];
  rotation: KeyRow[];
  color: KeyRow[];
}

export interface CameraSpec {
  eye: Vec3;
  lookAt: Vec3;
}

export interface KeyframeDoc {
  sceneId: string;
  fps: number;
  frameCount: number;
  bounds: { x: [number, number]; y: [number, number] };
  camera: CameraSpec;
  lights: LightSpec[];
  objects: ObjectSpec[];
}

export interface ObjectState {
  position: Vec3;
  scale: number;
  rotation: number;
  color: Vec3;
}

const asVec3 = (value: unknown, label: string): Vec3 => {
  if (!Array.isArray(value) || value.length !== 3 || value.some((v) => typeof v !== "number")) {
    throw new Error(`${label}: expected [x, y, z]`);
  }
  return [value[0], value[1], value[2]];
};

const checkTrack = (rows: unknown, width: number, frameCount: number, label: string): KeyRow[] => {
  if (!Array.isArray(rows) || rows.length < 2) {
    throw new Error(`${label}: track needs at least 2 keyframe rows`);
  }
  for (const row of rows) {
    if (!Array.isArray(row) || row.length !== width || row.some((v) => typeof v !== "number")) {
      throw new Error(`${label}: keyframe rows must be [frame, ...${width - 1} values]`);
    }
  }
  const frames = rows.map((row) => row[0]);
  for (let i = 1; i < frames.length; i++) {
    if (frames[i] <= frames[i - 1]) {
      throw new Error(`${label}: keyframe frames must be strictly increasing`);
    }
  }
  if (frames[0] !== 0 || frames[frames.length - 1] !== frameCount) {
    throw new Error(`${label}: track must span frames 0..${frameCount}`);
  }
  return rows as KeyRow[];
};

export const parseKeyframeDoc = (text: string): KeyframeDoc => {
  let raw: any;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new Error(`keyframe document is not valid JSON: ${(err as Error).message}`);
  }
  if (typeof raw !== "object" || raw === null) {
    throw new Error("keyframe document must be a JSON object");
  }
  const frameCount = raw.frame_count;
  if (!Number.isInteger(frameCount) || frameCount <= 0) {
    throw new Error("keyframe document: frame_count must be a positive integer");
  }
  if (!Number.isFinite(raw.fps) || raw.fps <= 0) {
    throw new Error("keyframe document: fps must be positive");
  }
  if (!raw.camera || !raw.bounds || !Array.isArray(raw.lights) || !Array.isArray(raw.objects)) {
    throw new Error("keyframe document: missing camera, bounds, lights, or objects");
  }

  const camera: CameraSpec = {
    eye: asVec3(raw.camera.eye, "camera.eye"),
    lookAt: asVec3(raw.camera.look_at, "camera.look_at"),
  };

  const lights: LightSpec[] = raw.lights.map((l: any, i: number) => {
    const label = `light[${i}]`;
    if (typeof l.name !== "string" || !Number.isFinite(l.intensity)) {
      throw new Error(`${label}: needs name and numeric intensity`);
    }
    const keys =
      l.intensity_keyframes == null
        ? null
        : checkTrack(l.intensity_keyframes, 2, frameCount, `${label}.intensity`);
    return {
      name: l.name,
      position: asVec3(l.position, `${label}.position`),
      intensity: l.intensity,
      intensityKeyframes: keys,
    };
  });

  const objects: ObjectSpec[] = raw.objects.map((o: any) => {
    const id = typeof o.id === "string" ? o.id : "<unnamed>";
    if (!(SHAPES as readonly string[]).includes(o.shape)) {
      throw new Error(`object ${id}: unknown shape "${o.shape}"`);
    }
    if (!(MATERIALS as readonly string[]).includes(o.material)) {
      throw new Error(`object ${id}: unknown material "${o.material}"`);
    }
    return {
      id,
      shape: o.shape as Shape,
      material: o.material as Material,
      meshRef: typeof o.mesh_ref === "string" ? o.mesh_ref : `mesh/${o.shape}`,
      position: checkTrack(o.position, 3, frameCount, `object ${id}.position`),
      scale: checkTrack(o.scale, 2, frameCount, `object ${id}.scale`),
      rotation: checkTrack(o.rotation, 2, frameCount, `object ${id}.rotation`),
      color: checkTrack(o.color, 4, frameCount, `object ${id}.color`),
    };
  });

  return {
    sceneId: typeof raw.scene_id === "string" ? raw.scene_id : "",
    fps: raw.fps,
    frameCount,
    bounds: raw.bounds,
    camera,
    lights,
    objects,
  };
};

// Linear interpolation over a [frame, ...values] track. Frames outside the
// keyed range clamp to the nearest endpoint.
export const sampleTrack = (rows: KeyRow[], frame: number): number[] => {
  const first = rows[0];
  const last = rows[rows.length - 1];
  if (frame <= first[0]) {
    return first.slice(1);
  }
  if (frame >= last[0]) {
    return last.slice(1);
  }
  let lo = 0;
  let hi = rows.length - 1;
  while (hi - lo > 1) {
    const mid = (lo + hi) >> 1;
    if (rows[mid][0] <= frame) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const a = rows[lo];
  const b = rows[hi];
  const t = (frame - a[0]) / (b[0] - a[0]);
  const out = new Array<number>(a.length - 1);
  for (let i = 1; i < a.length; i++) {
    out[i - 1] = a[i] + (b[i] - a[i]) * t;
  }
  return out;
};

export const objectStateAt = (obj: ObjectSpec, frame: number): ObjectState => {
  const [x, y] = sampleTrack(obj.position, frame);
  const [s] = sampleTrack(obj.scale, frame);
  const [rot] = sampleTrack(obj.rotation, frame);
  const [r, g, b] = sampleTrack(obj.color, frame);
  // ground contact rule: z equals the interpolated scale
  return { position: [x, y, s], scale: s, rotation: rot, color: [r, g, b] };
};

export const lightIntensityAt = (light: LightSpec, frame: number): number => {
  if (light.intensityKeyframes === null) {
    return light.intensity;
  }
  return sampleTrack(light.intensityKeyframes, frame)[0];
};
