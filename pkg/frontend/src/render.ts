/**
 * Deterministic analytic ray tracer for keyframe documents.
 *
 * One primary ray per pixel sample, closed-form intersections, hard shadows,
 * no stochastic sampling anywhere: rendering the same frame twice produces
 * byte-identical output. This is the "noise-controlled" profile that makes
 * pixel-level frame comparisons meaningful.
 *
 * Geometry profile (the document only names meshes; their shape is defined
 * here): every mesh is a canonical unit solid of half-height 1 centered at
 * the origin, scaled by the object's scale s and lifted so it rests on the
 * ground plane z=0. The document's implied position z equals s, which is
 * exactly that lift.
 *   sphere   radius s, center (x, y, s)
 *   cube     half-extent s, center (x, y, s), yawed by the rotation track
 *   cylinder radius s, caps at z=0 and z=2s
 *   cone     base radius s at z=0, apex at (x, y, 2s)
 */
import {
  KeyframeDoc,
  LightSpec,
  Material,
  ObjectSpec,
  lightIntensityAt,
  objectStateAt,
} from "./keyframes";
import { Image } from "./ppm";
import { Vec3, add, cross, dot, normalize, scale, sub } from "./vec";

export type Profile = "preview" | "full";

export interface RenderOptions {
  width: number;
  height: number;
  profile?: Profile;
  fovDeg?: number;
  ambient?: number;
  exposure?: number;
}

interface Hit {
  t: number;
  point: Vec3;
  normal: Vec3;
  albedo: Vec3;
  material: Material | "ground";
}

interface Primitive {
  albedo: Vec3;
  material: Material;
  intersect(origin: Vec3, dir: Vec3, tMax: number): Hit | null;
}

const EPS = 1e-6;

class Sphere implements Primitive {
  constructor(
    public center: Vec3,
    public radius: number,
    public albedo: Vec3,
    public material: Material,
  ) {}

  intersect(origin: Vec3, dir: Vec3, tMax: number): Hit | null {
    const oc = sub(origin, this.center);
    const b = dot(oc, dir);
    const c = dot(oc, oc) - this.radius * this.radius;
    const disc = b * b - c;
    if (disc < 0) {
      return null;
    }
    const sq = Math.sqrt(disc);
    let t = -b - sq;
    if (t < EPS) {
      t = -b + sq;
    }
    if (t < EPS || t > tMax) {
      return null;
    }
    const point = add(origin, scale(dir, t));
    const normal = scale(sub(point, this.center), 1 / this.radius);
    return { t, point, normal, albedo: this.albedo, material: this.material };
  }
}

class Box implements Primitive {
  private cos: number;
  private sin: number;

  constructor(
    public center: Vec3,
    public half: number,
    yawDegrees: number,
    public albedo: Vec3,
    public material: Material,
  ) {
    const rad = (yawDegrees * Math.PI) / 180;
    this.cos = Math.cos(rad);
    this.sin = Math.sin(rad);
  }

  // world -> box frame (inverse yaw)
  private toLocal(v: Vec3): Vec3 {
    return [this.cos * v[0] + this.sin * v[1], -this.sin * v[0] + this.cos * v[1], v[2]];
  }

  private toWorld(v: Vec3): Vec3 {
    return [this.cos * v[0] - this.sin * v[1], this.sin * v[0] + this.cos * v[1], v[2]];
  }

  intersect(origin: Vec3, dir: Vec3, tMax: number): Hit | null {
    const o = this.toLocal(sub(origin, this.center));
    const d = this.toLocal(dir);
    let tNear = -Infinity;
    let tFar = Infinity;
    let axisNear = -1;
    let axisFar = -1;
    for (let i = 0; i < 3; i++) {
      if (Math.abs(d[i]) < 1e-12) {
        if (Math.abs(o[i]) > this.half) {
          return null;
        }
        continue;
      }
      let t0 = (-this.half - o[i]) / d[i];
      let t1 = (this.half - o[i]) / d[i];
      if (t0 > t1) {
        const tmp = t0;
        t0 = t1;
        t1 = tmp;
      }
      if (t0 > tNear) {
        tNear = t0;
        axisNear = i;
      }
      if (t1 < tFar) {
        tFar = t1;
        axisFar = i;
      }
      if (tNear > tFar) {
        return null;
      }
    }
    let t = tNear;
    let axis = axisNear;
    if (t < EPS) {
      t = tFar;
      axis = axisFar;
    }
    if (t < EPS || t > tMax || axis < 0) {
      return null;
    }
    const localHit = add(o, scale(d, t));
    const localNormal: Vec3 = [0, 0, 0];
    localNormal[axis] = localHit[axis] > 0 ? 1 : -1;
    const point = add(origin, scale(dir, t));
    return {
      t,
      point,
      normal: this.toWorld(localNormal),
      albedo: this.albedo,
      material: this.material,
    };
  }
}

class Cylinder implements Primitive {
  constructor(
    public center: Vec3, // ground point (x, y, 0) is center minus the lift
    public radius: number,
    public height: number, // spans z in [0, height]
    public albedo: Vec3,
    public material: Material,
  ) {}

  intersect(origin: Vec3, dir: Vec3, tMax: number): Hit | null {
    const cx = this.center[0];
    const cy = this.center[1];
    const ox = origin[0] - cx;
    const oy = origin[1] - cy;
    let best: Hit | null = null;

    // lateral surface
    const a = dir[0] * dir[0] + dir[1] * dir[1];
    if (a > 1e-12) {
      const b = ox * dir[0] + oy * dir[1];
      const c = ox * ox + oy * oy - this.radius * this.radius;
      const disc = b * b - a * c;
      if (disc >= 0) {
        const sq = Math.sqrt(disc);
        for (const t of [(-b - sq) / a, (-b + sq) / a]) {
          if (t < EPS || t > tMax) {
            continue;
          }
          const z = origin[2] + t * dir[2];
          if (z < 0 || z > this.height) {
            continue;
          }
          const point = add(origin, scale(dir, t));
          const normal = normalize([point[0] - cx, point[1] - cy, 0]);
          best = { t, point, normal, albedo: this.albedo, material: this.material };
          break; // roots are ordered; first valid is nearest
        }
      }
    }

    // caps
    if (Math.abs(dir[2]) > 1e-12) {
      for (const [zCap, nz] of [
        [0, -1],
        [this.height, 1],
      ] as const) {
        const t = (zCap - origin[2]) / dir[2];
        if (t < EPS || t > tMax || (best !== null && t >= best.t)) {
          continue;
        }
        const px = origin[0] + t * dir[0] - cx;
        const py = origin[1] + t * dir[1] - cy;
        if (px * px + py * py <= this.radius * this.radius) {
          const point = add(origin, scale(dir, t));
          best = { t, point, normal: [0, 0, nz], albedo: this.albedo, material: this.material };
        }
      }
    }
    return best;
  }
}

class Cone implements Primitive {
  constructor(
    public apex: Vec3, // (x, y, 2s)
    public baseRadius: number,
    public height: number,
    public albedo: Vec3,
    public material: Material,
  ) {}

  intersect(origin: Vec3, dir: Vec3, tMax: number): Hit | null {
    const k = this.baseRadius / this.height; // slope of the lateral surface
    const k2 = k * k;
    const u: Vec3 = sub(origin, this.apex);
    let best: Hit | null = null;

    // lateral surface of the downward nappe: x^2 + y^2 = k^2 z^2, z in [-height, 0]
    const a = dir[0] * dir[0] + dir[1] * dir[1] - k2 * dir[2] * dir[2];
    const b = u[0] * dir[0] + u[1] * dir[1] - k2 * u[2] * dir[2];
    const c = u[0] * u[0] + u[1] * u[1] - k2 * u[2] * u[2];
    const candidates: number[] = [];
    if (Math.abs(a) > 1e-12) {
      const disc = b * b - a * c;
      if (disc >= 0) {
        const sq = Math.sqrt(disc);
        candidates.push((-b - sq) / a, (-b + sq) / a);
      }
    } else if (Math.abs(b) > 1e-12) {
      candidates.push(-c / (2 * b));
    }
    for (const t of candidates.sort((p, q) => p - q)) {
      if (t < EPS || t > tMax) {
        continue;
      }
      const z = u[2] + t * dir[2];
      if (z < -this.height || z > 0) {
        continue;
      }
      const point = add(origin, scale(dir, t));
      const local: Vec3 = sub(point, this.apex);
      const normal = normalize([2 * local[0], 2 * local[1], -2 * k2 * local[2]]);
      best = { t, point, normal, albedo: this.albedo, material: this.material };
      break;
    }

    // base disk at the ground
    if (Math.abs(dir[2]) > 1e-12) {
      const zBase = this.apex[2] - this.height;
      const t = (zBase - origin[2]) / dir[2];
      if (t > EPS && t < tMax && (best === null || t < best.t)) {
        const px = origin[0] + t * dir[0] - this.apex[0];
        const py = origin[1] + t * dir[1] - this.apex[1];
        if (px * px + py * py <= this.baseRadius * this.baseRadius) {
          const point = add(origin, scale(dir, t));
          best = { t, point, normal: [0, 0, -1], albedo: this.albedo, material: this.material };
        }
      }
    }
    return best;
  }
}

const buildPrimitive = (obj: ObjectSpec, frame: number): Primitive => {
  const st = objectStateAt(obj, frame);
  const s = st.scale;
  switch (obj.shape) {
    case "sphere":
      return new Sphere(st.position, s, st.color, obj.material);
    case "cube":
      return new Box(st.position, s, st.rotation, st.color, obj.material);
    case "cylinder":
      return new Cylinder(st.position, s, 2 * s, st.color, obj.material);
    case "cone":
      return new Cone([st.position[0], st.position[1], 2 * s], s, 2 * s, st.color, obj.material);
  }
};

const GROUND_ALBEDO: Vec3 = [0.58, 0.58, 0.6];
// irradiance from a point light: intensity spread over the sphere at range r
const lightFalloff = (intensity: number, r2: number): number => intensity / (4 * Math.PI * r2);

const background = (dir: Vec3): Vec3 => {
  const t = Math.max(0, Math.min(1, 0.5 * (dir[2] + 1)));
  return [0.05 + 0.03 * t, 0.06 + 0.04 * t, 0.08 + 0.06 * t];
};

interface FrameScene {
  primitives: Primitive[];
  lights: { position: Vec3; power: number }[];
}

const intersectGround = (origin: Vec3, dir: Vec3, tMax: number): Hit | null => {
  if (Math.abs(dir[2]) < 1e-12 || origin[2] <= 0) {
    return null;
  }
  const t = -origin[2] / dir[2];
  if (t < EPS || t > tMax) {
    return null;
  }
  const point = add(origin, scale(dir, t));
  return { t, point, normal: [0, 0, 1], albedo: GROUND_ALBEDO, material: "ground" };
};

const traceNearest = (scene: FrameScene, origin: Vec3, dir: Vec3): Hit | null => {
  let best = intersectGround(origin, dir, Infinity);
  for (const prim of scene.primitives) {
    const hit = prim.intersect(origin, dir, best ? best.t : Infinity);
    if (hit !== null && (best === null || hit.t < best.t)) {
      best = hit;
    }
  }
  return best;
};

// objects block light; the ground never occludes lights placed above it
const occluded = (scene: FrameScene, origin: Vec3, dir: Vec3, dist: number): boolean => {
  for (const prim of scene.primitives) {
    if (prim.intersect(origin, dir, dist - 1e-4) !== null) {
      return true;
    }
  }
  return false;
};

const shade = (scene: FrameScene, hit: Hit, viewDir: Vec3, ambient: number): Vec3 => {
  let n = hit.normal;
  if (dot(n, viewDir) > 0) {
    n = scale(n, -1);
  }
  const out: Vec3 = [hit.albedo[0] * ambient, hit.albedo[1] * ambient, hit.albedo[2] * ambient];
  const shadowOrigin = add(hit.point, scale(n, 1e-4));
  for (const light of scene.lights) {
    const toLight = sub(light.position, hit.point);
    const r2 = dot(toLight, toLight);
    const dist = Math.sqrt(r2);
    const l = scale(toLight, 1 / dist);
    const nl = dot(n, l);
    if (nl <= 0) {
      continue;
    }
    if (occluded(scene, shadowOrigin, l, dist)) {
      continue;
    }
    const e = lightFalloff(light.power, r2) * nl;
    out[0] += hit.albedo[0] * e;
    out[1] += hit.albedo[1] * e;
    out[2] += hit.albedo[2] * e;
    if (hit.material === "metal") {
      const h = normalize(sub(l, viewDir));
      const spec = Math.pow(Math.max(0, dot(n, h)), 32) * lightFalloff(light.power, r2);
      // metal highlights keep the surface tint
      out[0] += spec * (0.2 + 0.8 * hit.albedo[0]);
      out[1] += spec * (0.2 + 0.8 * hit.albedo[1]);
      out[2] += spec * (0.2 + 0.8 * hit.albedo[2]);
    }
  }
  return out;
};

const tonemap = (v: number, exposure: number): number => {
  const e = v * exposure;
  return e / (1 + e);
};

export const renderFrame = (doc: KeyframeDoc, frame: number, opts: RenderOptions): Image => {
  const profile: Profile = opts.profile ?? "preview";
  const fov = ((opts.fovDeg ?? 42) * Math.PI) / 180;
  const ambient = opts.ambient ?? 0.08;
  const exposure = opts.exposure ?? 1.0;

  const scene: FrameScene = {
    primitives: doc.objects.map((obj) => buildPrimitive(obj, frame)),
    lights: doc.lights.map((l: LightSpec) => ({
      position: l.position,
      power: lightIntensityAt(l, frame),
    })),
  };

  const eye = doc.camera.eye;
  const forward = normalize(sub(doc.camera.lookAt, eye));
  const worldUp: Vec3 = [0, 0, 1];
  const right = normalize(cross(forward, worldUp));
  const up = cross(right, forward);
  const tanHalf = Math.tan(fov / 2);
  const aspect = opts.width / opts.height;

  // deterministic sample grid: preview 1 center sample, full a 2x2 grid
  const offsets: [number, number][] =
    profile === "full"
      ? [
          [0.25, 0.25],
          [0.75, 0.25],
          [0.25, 0.75],
          [0.75, 0.75],
        ]
      : [[0.5, 0.5]];

  const img = new Image(opts.width, opts.height);
  for (let py = 0; py < opts.height; py++) {
    for (let px = 0; px < opts.width; px++) {
      let r = 0;
      let g = 0;
      let b = 0;
      for (const [ox, oy] of offsets) {
        const u = ((px + ox) / opts.width) * 2 - 1;
        const v = 1 - ((py + oy) / opts.height) * 2;
        const dir = normalize(
          add(forward, add(scale(right, u * tanHalf * aspect), scale(up, v * tanHalf))),
        );
        const hit = traceNearest(scene, eye, dir);
        const color = hit === null ? background(dir) : shade(scene, hit, dir, ambient);
        r += color[0];
        g += color[1];
        b += color[2];
      }
      const inv = 1 / offsets.length;
      img.setPixel(px, py, tonemap(r * inv, exposure), tonemap(g * inv, exposure), tonemap(b * inv, exposure));
    }
  }
  return img;
};
