import { describe, expect, it } from "vitest";

import {
  cameraPoseQuat,
  clampView,
  DEFAULT_VIEW,
  normalize,
  orbitCamera,
  projectPoint,
  rotate,
  sub,
} from "../src/math.js";

describe("orbit camera", () => {
  it("looks at the target from the configured distance", () => {
    const cam = orbitCamera({ target: [1, 2, 3], distance: 5, yaw: 0.7, pitch: 0.3, fovY: 1 });
    const toTarget = sub([1, 2, 3], cam.eye);
    expect(Math.hypot(...toTarget)).toBeCloseTo(5, 10);
    expect(normalize(toTarget)).toEqual(cam.forward.map((v) => expect.closeTo(v, 10)));
  });

  it("projects the target to the canvas center", () => {
    const cam = orbitCamera({ ...DEFAULT_VIEW, target: [0, 1, 0] });
    const p = projectPoint(cam, [0, 1, 0], 640, 480)!;
    expect(p.x).toBeCloseTo(320, 6);
    expect(p.y).toBeCloseTo(240, 6);
    expect(p.depth).toBeCloseTo(DEFAULT_VIEW.distance, 6);
  });

  it("culls points behind the eye", () => {
    const cam = orbitCamera({ target: [0, 0, 0], distance: 4, yaw: 0, pitch: 0, fovY: 1 });
    const behind = [cam.eye[0], cam.eye[1], cam.eye[2] + 1] as [number, number, number];
    expect(projectPoint(cam, behind, 100, 100)).toBeNull();
  });
});

describe("view clamping", () => {
  it("keeps distance positive and pitch inside (-pi/2, pi/2)", () => {
    const v = clampView({ ...DEFAULT_VIEW, distance: -3, pitch: 2.2 });
    expect(v.distance).toBeGreaterThan(0);
    expect(v.pitch).toBeLessThan(Math.PI / 2);
    const w = clampView({ ...DEFAULT_VIEW, pitch: -2.2 });
    expect(w.pitch).toBeGreaterThan(-Math.PI / 2);
  });
});

describe("camera pose quaternion", () => {
  it("rotates local -z onto the forward direction", () => {
    for (const [yaw, pitch] of [[0, 0], [0.9, 0.4], [-2.0, -0.7], [3.0, 1.2]]) {
      const cam = orbitCamera({ target: [0, 1, 0], distance: 6, yaw, pitch, fovY: 1 });
      const q = cameraPoseQuat(cam);
      const fwd = rotate(q, [0, 0, -1]);
      for (let i = 0; i < 3; i++) expect(fwd[i]).toBeCloseTo(cam.forward[i], 8);
      const up = rotate(q, [0, 1, 0]);
      for (let i = 0; i < 3; i++) expect(up[i]).toBeCloseTo(cam.up[i], 8);
    }
  });
});
