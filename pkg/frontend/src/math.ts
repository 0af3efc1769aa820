// Just enough 3D math for the viewport: vectors, scalar-first quaternions,
// an orbit camera, and pinhole projection matching the server's convention
// (camera looks down -z, pixel centers at +0.5, v grows downward).

export type V3 = [number, number, number];
export type QuatWXYZ = [number, number, number, number];

export function add(a: V3, b: V3): V3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function sub(a: V3, b: V3): V3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function scale(a: V3, s: number): V3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

export function dot(a: V3, b: V3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: V3, b: V3): V3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function norm(a: V3): number {
  return Math.sqrt(dot(a, a));
}

export function normalize(a: V3): V3 {
  const n = norm(a);
  return n > 0 ? scale(a, 1 / n) : a;
}

export function rotate(q: QuatWXYZ, v: V3): V3 {
  // q v q* with q unit, scalar-first
  const [w, x, y, z] = q;
  const u: V3 = [x, y, z];
  const uv = cross(u, v);
  const uuv = cross(u, uv);
  return add(v, add(scale(uv, 2 * w), scale(uuv, 2)));
}

export function applyTransform(t: { t: V3 | number[]; r: number[]; s: number }, p: V3): V3 {
  const rotated = rotate(t.r as QuatWXYZ, p);
  return add(scale(rotated, t.s), t.t as V3);
}

export interface ViewState {
  target: V3;
  distance: number; // > 0
  yaw: number;
  pitch: number; // in (-pi/2, pi/2)
  fovY: number;
}

export const DEFAULT_VIEW: ViewState = {
  target: [0, 0.5, 0],
  distance: 8,
  yaw: 0,
  pitch: 0.35,
  fovY: Math.PI / 3,
};

export function clampView(v: ViewState): ViewState {
  const eps = 0.01;
  return {
    ...v,
    distance: Math.max(v.distance, 0.1),
    pitch: Math.min(Math.max(v.pitch, -Math.PI / 2 + eps), Math.PI / 2 - eps),
  };
}

export interface CameraBasis {
  eye: V3;
  right: V3;
  up: V3;
  forward: V3; // unit, toward the target
  fovY: number;
}

export function orbitCamera(view: ViewState): CameraBasis {
  const cp = Math.cos(view.pitch);
  const offset: V3 = [
    view.distance * cp * Math.sin(view.yaw),
    view.distance * Math.sin(view.pitch),
    view.distance * cp * Math.cos(view.yaw),
  ];
  const eye = add(view.target, offset);
  const forward = normalize(sub(view.target, eye));
  let right = cross(forward, [0, 1, 0]);
  if (norm(right) < 1e-6) right = [1, 0, 0];
  right = normalize(right);
  const up = cross(right, forward);
  return { eye, right, up, forward, fovY: view.fovY };
}

export interface Projected {
  x: number;
  y: number;
  depth: number; // view-space meters, positive in front
  scale: number; // screen pixels per world meter at this depth
}

export function projectPoint(
  cam: CameraBasis,
  p: V3,
  width: number,
  height: number,
): Projected | null {
  const rel = sub(p, cam.eye);
  const depth = dot(rel, cam.forward);
  if (depth <= 0.05) return null;
  const f = height / 2 / Math.tan(cam.fovY / 2);
  const x = width / 2 + (f * dot(rel, cam.right)) / depth;
  const y = height / 2 - (f * dot(rel, cam.up)) / depth;
  return { x, y, depth, scale: f / depth };
}

// Camera pose for server-side snapshot requests (magic camera): quaternion
// with columns [right, up, -forward], matching the engine's convention.
export function cameraPoseQuat(cam: CameraBasis): QuatWXYZ {
  const r = cam.right;
  const u = cam.up;
  const b: V3 = scale(cam.forward, -1);
  const m = [
    [r[0], u[0], b[0]],
    [r[1], u[1], b[1]],
    [r[2], u[2], b[2]],
  ];
  const tr = m[0][0] + m[1][1] + m[2][2];
  let w: number, x: number, y: number, z: number;
  if (tr > 0) {
    const s = Math.sqrt(tr + 1) * 2;
    w = s / 4;
    x = (m[2][1] - m[1][2]) / s;
    y = (m[0][2] - m[2][0]) / s;
    z = (m[1][0] - m[0][1]) / s;
  } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
    const s = Math.sqrt(1 + m[0][0] - m[1][1] - m[2][2]) * 2;
    w = (m[2][1] - m[1][2]) / s;
    x = s / 4;
    y = (m[0][1] + m[1][0]) / s;
    z = (m[0][2] + m[2][0]) / s;
  } else if (m[1][1] > m[2][2]) {
    const s = Math.sqrt(1 + m[1][1] - m[0][0] - m[2][2]) * 2;
    w = (m[0][2] - m[2][0]) / s;
    x = (m[0][1] + m[1][0]) / s;
    y = s / 4;
    z = (m[1][2] + m[2][1]) / s;
  } else {
    const s = Math.sqrt(1 + m[2][2] - m[0][0] - m[1][1]) * 2;
    w = (m[1][0] - m[0][1]) / s;
    x = (m[0][2] + m[2][0]) / s;
    y = (m[1][2] + m[2][1]) / s;
    z = s / 4;
  }
  const n = Math.hypot(w, x, y, z);
  return [w / n, x / n, y / n, z / n];
}
