// Viewport rendering in two halves: buildDrawList is a pure function of
// (scene, decoded assets, view, canvas size) returning depth-sorted draw
// items; paint() rasterizes them onto a 2D canvas. Splats draw as DC-colored
// point sprites, primitives and low-fi meshes as wireframes, 2D proxies as
// camera-facing image billboards, and every object carries a bounds box for
// selection feedback. Objects whose assets are missing fall back to the
// wireframe box.

import type { LabelInput, PlacedLabel } from "./labels.js";
import { stackLabels } from "./labels.js";
import type { CameraBasis, V3, ViewState } from "./math.js";
import { applyTransform, orbitCamera, projectPoint } from "./math.js";
import type { WireMesh } from "./obj.js";
import type { RgbImage } from "./ppm.js";
import type { SplatPoints } from "./splats.js";
import type { SceneJson, SceneObjectJson } from "./types.js";

export type DecodedAsset =
  | { kind: "splat"; points: SplatPoints }
  | { kind: "mesh"; mesh: WireMesh }
  | { kind: "image"; image: RgbImage };

export type AssetCache = Map<string, DecodedAsset>;

export type DrawItem =
  | { kind: "point"; x: number; y: number; radius: number; color: string; depth: number }
  | { kind: "line"; x1: number; y1: number; x2: number; y2: number; color: string; depth: number; width?: number }
  | { kind: "image"; image: RgbImage; x: number; y: number; w: number; h: number; depth: number }
  | { kind: "circle"; x: number; y: number; radius: number; color: string; depth: number };

export interface Frame {
  items: DrawItem[]; // back-to-front
  labels: PlacedLabel[];
  anchors: { objectId: string; x: number; top: number; radiusPx: number; depth: number }[];
}

const GRID_COLOR = "#3c4048";
const BOUNDS_COLOR = "#6f7683";
const SELECTED_COLOR = "#ffb454";
const WIRE_COLOR = "#9aa3b2";
const PLACEHOLDER_COLOR = "#c05f5f";

const CUBE_CORNERS: V3[] = [
  [-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
  [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1],
];
const CUBE_EDGES: [number, number][] = [
  [0, 1], [1, 2], [2, 3], [3, 0],
  [4, 5], [5, 6], [6, 7], [7, 4],
  [0, 4], [1, 5], [2, 6], [3, 7],
];

export function buildDrawList(
  scene: SceneJson | null,
  assets: AssetCache,
  view: ViewState,
  width: number,
  height: number,
  selection: string | null = null,
): Frame {
  const cam = orbitCamera(view);
  const items: DrawItem[] = [];
  const labels: LabelInput[] = [];
  const anchors: Frame["anchors"] = [];

  addGrid(items, cam, width, height);

  for (const obj of scene?.objects ?? []) {
    const color = obj.id === selection ? SELECTED_COLOR : BOUNDS_COLOR;
    const anchor = addBoundsBox(items, cam, obj, color, width, height);
    if (anchor) {
      anchors.push({ objectId: obj.id, ...anchor });
      if (obj.annotation && obj.annotation.prompt) {
        labels.push({
          objectId: obj.id,
          text: obj.annotation.prompt,
          x: anchor.x,
          y: anchor.top - 8,
          depth: anchor.depth,
        });
      }
    }

    const kind = obj.kind;
    if (kind.type === "splat" && kind.asset && assets.get(kind.asset)?.kind === "splat") {
      const { points } = assets.get(kind.asset) as { kind: "splat"; points: SplatPoints };
      addSplatPoints(items, cam, obj, points, width, height);
    } else if (kind.type === "primitive_arrangement") {
      for (const prim of kind.primitives ?? []) {
        addPrimitiveWire(items, cam, obj, prim, width, height);
      }
    } else if ((kind.type === "mesh" || kind.type === "proxy3d") && kind.asset) {
      const decoded = assets.get(kind.asset);
      if (decoded?.kind === "mesh") {
        addMeshWire(items, cam, obj, decoded.mesh, width, height);
      } else if (anchor) {
        // asset still loading or missing: mark the placeholder wireframe
        items.push({ kind: "circle", x: anchor.x, y: anchor.top, radius: 4,
                     color: PLACEHOLDER_COLOR, depth: anchor.depth });
      }
    } else if (kind.type === "proxy2d" && kind.asset) {
      const decoded = assets.get(kind.asset);
      if (decoded?.kind === "image") {
        addBillboard(items, cam, obj, decoded.image, width, height);
      }
    }
  }

  items.sort((a, b) => b.depth - a.depth); // painter's order
  return { items, labels: stackLabels(labels), anchors };
}

function addGrid(items: DrawItem[], cam: CameraBasis, w: number, h: number) {
  for (let i = -5; i <= 5; i++) {
    addWorldLine(items, cam, [i, 0, -5], [i, 0, 5], GRID_COLOR, w, h);
    addWorldLine(items, cam, [-5, 0, i], [5, 0, i], GRID_COLOR, w, h);
  }
}

function addWorldLine(
  items: DrawItem[], cam: CameraBasis, a: V3, b: V3, color: string,
  w: number, h: number, widthPx?: number,
) {
  const pa = projectPoint(cam, a, w, h);
  const pb = projectPoint(cam, b, w, h);
  if (!pa || !pb) return;
  items.push({
    kind: "line", x1: pa.x, y1: pa.y, x2: pb.x, y2: pb.y,
    color, depth: (pa.depth + pb.depth) / 2, width: widthPx,
  });
}

function addBoundsBox(
  items: DrawItem[], cam: CameraBasis, obj: SceneObjectJson, color: string,
  w: number, h: number,
): { x: number; top: number; radiusPx: number; depth: number } | null {
  const { min, max } = obj.anchor_bounds;
  const corners: V3[] = [];
  for (const x of [min[0], max[0]])
    for (const y of [min[1], max[1]])
      for (const z of [min[2], max[2]]) corners.push([x, y, z]);
  const world = corners.map((c) => applyTransform(obj.transform, c));
  const projected = world.map((p) => projectPoint(cam, p, w, h));
  const order = [0, 1, 3, 2, 0, 4, 5, 7, 6, 4]; // enough edges to read as a box
  for (let i = 0; i + 1 < order.length; i++) {
    const pa = projected[order[i]];
    const pb = projected[order[i + 1]];
    if (pa && pb) {
      items.push({ kind: "line", x1: pa.x, y1: pa.y, x2: pb.x, y2: pb.y,
                   color, depth: (pa.depth + pb.depth) / 2 });
    }
  }
  const visible = projected.filter((p): p is NonNullable<typeof p> => p !== null);
  if (!visible.length) return null;
  const cx = visible.reduce((acc, p) => acc + p.x, 0) / visible.length;
  const top = Math.min(...visible.map((p) => p.y));
  const depth = visible.reduce((acc, p) => acc + p.depth, 0) / visible.length;
  const radiusPx = Math.max(...visible.map((p) => Math.hypot(p.x - cx, p.y - top))) / 2 + 6;
  return { x: cx, top, radiusPx, depth };
}

function addSplatPoints(
  items: DrawItem[], cam: CameraBasis, obj: SceneObjectJson, points: SplatPoints,
  w: number, h: number,
) {
  const maxSprites = 4000; // stride for very dense clouds; previews only
  const step = Math.max(1, Math.ceil(points.count / maxSprites));
  for (let i = 0; i < points.count; i += step) {
    if (points.opacity[i] < 0.05) continue;
    const local: V3 = [
      points.positions[i * 3], points.positions[i * 3 + 1], points.positions[i * 3 + 2],
    ];
    const p = projectPoint(cam, applyTransform(obj.transform, local), w, h);
    if (!p) continue;
    const radius = Math.max(1, Math.min(8, points.sizes[i] * obj.transform.s * p.scale));
    const r = points.colors[i * 3];
    const g = points.colors[i * 3 + 1];
    const b = points.colors[i * 3 + 2];
    items.push({
      kind: "point", x: p.x, y: p.y, radius,
      color: `rgba(${r},${g},${b},${Math.min(points.opacity[i], 1).toFixed(3)})`,
      depth: p.depth,
    });
  }
}

function addPrimitiveWire(
  items: DrawItem[], cam: CameraBasis, obj: SceneObjectJson,
  prim: { shape: string; transform: { t: number[]; r: number[]; s: number } },
  w: number, h: number,
) {
  const toWorld = (local: V3): V3 =>
    applyTransform(obj.transform, applyTransform(prim.transform, local));
  if (prim.shape === "sphere") {
    const center = projectPoint(cam, toWorld([0, 0, 0]), w, h);
    if (center) {
      const radius = prim.transform.s * obj.transform.s * center.scale;
      items.push({ kind: "circle", x: center.x, y: center.y, radius,
                   color: WIRE_COLOR, depth: center.depth });
    }
    return;
  }
  // cube and cylinder share the box silhouette; the cylinder adds cap circles
  for (const [a, b] of CUBE_EDGES) {
    addWorldLine(items, cam, toWorld(CUBE_CORNERS[a]), toWorld(CUBE_CORNERS[b]), WIRE_COLOR, w, h);
  }
  if (prim.shape === "cylinder") {
    for (const y of [-1, 1]) {
      const center = projectPoint(cam, toWorld([0, y, 0]), w, h);
      if (center) {
        items.push({ kind: "circle", x: center.x, y: center.y,
                     radius: prim.transform.s * obj.transform.s * center.scale,
                     color: WIRE_COLOR, depth: center.depth });
      }
    }
  }
}

function addMeshWire(
  items: DrawItem[], cam: CameraBasis, obj: SceneObjectJson, mesh: WireMesh,
  w: number, h: number,
) {
  const maxEdges = 3000;
  const step = Math.max(1, Math.ceil(mesh.edges.length / 2 / maxEdges));
  for (let e = 0; e < mesh.edges.length / 2; e += step) {
    const a = mesh.edges[e * 2];
    const b = mesh.edges[e * 2 + 1];
    const pa: V3 = [mesh.vertices[a * 3], mesh.vertices[a * 3 + 1], mesh.vertices[a * 3 + 2]];
    const pb: V3 = [mesh.vertices[b * 3], mesh.vertices[b * 3 + 1], mesh.vertices[b * 3 + 2]];
    addWorldLine(items, cam, applyTransform(obj.transform, pa),
                 applyTransform(obj.transform, pb), WIRE_COLOR, w, h);
  }
}

function addBillboard(
  items: DrawItem[], cam: CameraBasis, obj: SceneObjectJson, image: RgbImage,
  w: number, h: number,
) {
  // camera-facing quad is an axis-aligned rect in screen space
  const center = applyTransform(obj.transform, [0, 0.5, 0]);
  const p = projectPoint(cam, center, w, h);
  if (!p) return;
  const heightPx = obj.transform.s * p.scale;
  const widthPx = heightPx * (image.width / image.height);
  items.push({
    kind: "image", image,
    x: p.x - widthPx / 2, y: p.y - heightPx / 2, w: widthPx, h: heightPx,
    depth: p.depth,
  });
}

// ---------------------------------------------------------------------------
// canvas painting (DOM side, not unit-tested)

const imageCanvasCache = new WeakMap<RgbImage, HTMLCanvasElement>();

function canvasFor(image: RgbImage): HTMLCanvasElement {
  let canvas = imageCanvasCache.get(image);
  if (!canvas) {
    canvas = document.createElement("canvas");
    canvas.width = image.width;
    canvas.height = image.height;
    const ctx2d = canvas.getContext("2d")!;
    const data = ctx2d.createImageData(image.width, image.height);
    data.data.set(image.rgba);
    ctx2d.putImageData(data, 0, 0);
    imageCanvasCache.set(image, canvas);
  }
  return canvas;
}

export function paint(ctx: CanvasRenderingContext2D, frame: Frame, width: number, height: number) {
  ctx.fillStyle = "#17191d";
  ctx.fillRect(0, 0, width, height);
  for (const item of frame.items) {
    switch (item.kind) {
      case "line":
        ctx.strokeStyle = item.color;
        ctx.lineWidth = item.width ?? 1;
        ctx.beginPath();
        ctx.moveTo(item.x1, item.y1);
        ctx.lineTo(item.x2, item.y2);
        ctx.stroke();
        break;
      case "point":
        ctx.fillStyle = item.color;
        ctx.beginPath();
        ctx.arc(item.x, item.y, item.radius, 0, Math.PI * 2);
        ctx.fill();
        break;
      case "circle":
        ctx.strokeStyle = item.color;
        ctx.lineWidth = 1;
        ctx.beginPath();
        ctx.arc(item.x, item.y, item.radius, 0, Math.PI * 2);
        ctx.stroke();
        break;
      case "image":
        ctx.drawImage(canvasFor(item.image), item.x, item.y, item.w, item.h);
        break;
    }
  }
  ctx.font = "12px ui-monospace, monospace";
  ctx.textBaseline = "middle";
  for (const label of frame.labels) {
    const textWidth = ctx.measureText(label.text).width + 12;
    const x = label.x - textWidth / 2;
    const y = label.y - label.height;
    ctx.fillStyle = "rgba(20, 22, 26, 0.85)";
    ctx.fillRect(x, y, textWidth, label.height);
    ctx.strokeStyle = "#566";
    ctx.strokeRect(x, y, textWidth, label.height);
    ctx.fillStyle = "#e8ebf0";
    ctx.fillText(label.text, x + 6, y + label.height / 2);
    ctx.strokeStyle = "#566";
    ctx.beginPath();
    ctx.moveTo(label.x, y + label.height);
    ctx.lineTo(label.x, label.y + 8);
    ctx.stroke();
  }
}

export function pickObject(frame: Frame, x: number, y: number): string | null {
  let best: { id: string; depth: number } | null = null;
  for (const anchor of frame.anchors) {
    const r = Math.max(anchor.radiusPx, 14);
    const dx = x - anchor.x;
    const dy = y - (anchor.top + r);
    if (dx * dx + dy * dy <= r * r * 4) {
      if (!best || anchor.depth < best.depth) best = { id: anchor.objectId, depth: anchor.depth };
    }
  }
  return best?.id ?? null;
}
