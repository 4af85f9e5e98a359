/**
 * One-time fixture preparation.
 *
 * Everything here goes through the neighboring package's external interfaces
 * only: the `gen` / `export-keyframes` CLI and the scene / keyframe JSON
 * contracts. Fixtures land in test/.fixtures and are reused across runs.
 */
import { execSync } from "child_process";
import * as fs from "fs";
import * as path from "path";

const FIXTURES = path.join(__dirname, ".fixtures");
const MARKER = path.join(FIXTURES, "ready");

const run = (cmd: string): void => {
  execSync(cmd, { stdio: ["ignore", "pipe", "pipe"] });
};

const camera = () => {
  const eye = [10.0, -9.0, 7.2];
  const n = Math.hypot(-eye[0], -eye[1]);
  const forward = [-eye[0] / n, -eye[1] / n];
  return { eye, forward, look_at: [0.0, 0.0, 0.0], right: [forward[1], -forward[0]] };
};

const lights = (modulated: boolean) => {
  const modulation = modulated ? { floor: 0.2, period_frames: 160 } : null;
  return [
    { intensity: 800.0, modulation, name: "key", position: [4.4, -4.4, 6.4] },
    { intensity: 300.0, modulation, name: "fill", position: [-4.4, -4.0, 3.3] },
    { intensity: 400.0, modulation, name: "back", position: [-1.3, 5.8, 4.9] },
  ];
};

// slow fully cyclic scene: one linear passes=1 mover plus one static cube
const bridgeFixtureScene = () => ({
  bounds: { x: [-4.0, 4.0], y: [-4.0, 4.0] },
  camera: camera(),
  fps: 32,
  frame_count: 160,
  lights: lights(false),
  objects: [
    {
      color0: "red",
      cycles: [
        {
          params: { switch_point: [2.0, 0.0, 0.0] },
          passes: 1,
          period_frames: 160,
          type: "linear_motion",
        },
      ],
      id: "o0",
      material: "rubber",
      mesh_ref: "mesh/sphere",
      orientation0: 0.0,
      position0: [-2.0, 0.0, 0.0],
      shape: "sphere",
      size0: "small",
    },
    {
      color0: "gray",
      cycles: [],
      id: "o1",
      material: "metal",
      mesh_ref: "mesh/cube",
      orientation0: 30.0,
      position0: [2.0, -2.0, 0.0],
      shape: "cube",
      size0: "large",
    },
  ],
  scene_id: "bridge_fixture",
  seed: 1,
  tier: "L1",
});

// static objects under modulated lights, for the luminance profile check
const lightFixtureScene = () => {
  const scene = bridgeFixtureScene();
  scene.lights = lights(true);
  scene.objects[0].cycles = [];
  scene.scene_id = "light_fixture";
  return scene;
};

export default function setup(): void {
  if (fs.existsSync(MARKER)) {
    return;
  }
  fs.mkdirSync(FIXTURES, { recursive: true });

  // generated dataset with an orbit cycle and per-frame reference tracks
  const ds = path.join(FIXTURES, "ds-l3");
  if (!fs.existsSync(path.join(ds, "manifest.json"))) {
    run(`python3 -m cyclebench gen --out ${ds} --seed 17 --tier L3 --count 3 --dense-tracks`);
  }
  const orbitScene = path.join(ds, "scenes", "L3_000002.json");
  run(
    `python3 -m cyclebench export-keyframes --scene ${orbitScene} ` +
      `--out ${path.join(FIXTURES, "orbit.keyframes.json")}`,
  );

  const bridgeScene = path.join(FIXTURES, "bridge_fixture.json");
  fs.writeFileSync(bridgeScene, JSON.stringify(bridgeFixtureScene(), null, 1));
  run(
    `python3 -m cyclebench export-keyframes --scene ${bridgeScene} ` +
      `--out ${path.join(FIXTURES, "bridge.keyframes.json")}`,
  );

  const lightScene = path.join(FIXTURES, "light_fixture.json");
  fs.writeFileSync(lightScene, JSON.stringify(lightFixtureScene(), null, 1));
  run(
    `python3 -m cyclebench export-keyframes --scene ${lightScene} ` +
      `--out ${path.join(FIXTURES, "light.keyframes.json")}`,
  );

  fs.writeFileSync(MARKER, "ok\n");
}
