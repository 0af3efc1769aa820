import { describe, expect, it } from "vitest";

import { labelText, stackLabels } from "../src/labels.js";
import { DEFAULT_VIEW } from "../src/math.js";
import { toInstruction } from "../src/actions.js";
import { buildDrawList, type AssetCache } from "../src/viewport.js";
import type { SceneJson, SceneObjectJson } from "../src/types.js";

const t = (x = 0, y = 0, z = 0, s = 1) => ({
  t: [x, y, z] as [number, number, number],
  r: [1, 0, 0, 0] as [number, number, number, number],
  s,
});

const bounds = { min: [-0.5, 0, -0.5] as [number, number, number], max: [0.5, 1, 0.5] as [number, number, number] };

function obj(id: string, kind: SceneObjectJson["kind"], prompt?: string): SceneObjectJson {
  return {
    id,
    kind,
    transform: t(),
    anchor_bounds: bounds,
    annotation: prompt
      ? { prompt, instruction_type: "generate_prompt", preview_asset: null, variant_index: null }
      : null,
  };
}

function scene(objects: SceneObjectJson[]): SceneJson {
  return { initial_scene_ref: null, next_seq: 0, objects };
}

describe("draw list", () => {
  it("renders only the grid for an empty scene", () => {
    const frame = buildDrawList(scene([]), new Map(), DEFAULT_VIEW, 640, 480);
    expect(frame.items.length).toBeGreaterThan(0);
    expect(frame.items.every((i) => i.kind === "line")).toBe(true);
    expect(frame.labels).toHaveLength(0);
  });

  it("is sorted back to front", () => {
    const frame = buildDrawList(
      scene([obj("a", { type: "proxy2d", asset: null }, "hello")]),
      new Map(),
      DEFAULT_VIEW,
      640,
      480,
    );
    const depths = frame.items.map((i) => i.depth);
    const sorted = [...depths].sort((x, y) => y - x);
    expect(depths).toEqual(sorted);
  });

  it("places an annotation label above the object", () => {
    const frame = buildDrawList(
      scene([obj("a", { type: "proxy2d", asset: null }, "Make an ornate brass lamp")]),
      new Map(),
      DEFAULT_VIEW,
      640,
      480,
    );
    expect(frame.labels).toHaveLength(1);
    const label = frame.labels[0];
    expect(label.text).toBe("Make an ornate brass lamp");
    const anchor = frame.anchors.find((a) => a.objectId === "a")!;
    expect(label.y).toBeLessThan(anchor.top); // hovers above the bounds
  });

  it("draws splat point sprites colored by the DC term", () => {
    const assets: AssetCache = new Map([
      [
        "cloud",
        {
          kind: "splat",
          points: {
            count: 2,
            positions: new Float32Array([0, 0.5, 0, 0.4, 0.5, 0]),
            colors: new Uint8ClampedArray([250, 10, 10, 10, 250, 10]),
            opacity: new Float32Array([0.9, 0.9]),
            sizes: new Float32Array([0.05, 0.05]),
          },
        },
      ],
    ]);
    const frame = buildDrawList(
      scene([obj("s", { type: "splat", asset: "cloud" })]),
      assets,
      DEFAULT_VIEW,
      640,
      480,
    );
    const points = frame.items.filter((i) => i.kind === "point");
    expect(points).toHaveLength(2);
    expect((points[0] as { color: string }).color).toContain("250");
  });

  it("falls back to the bounds wireframe while a mesh asset is missing", () => {
    const frame = buildDrawList(
      scene([obj("m", { type: "mesh", asset: "not-fetched-yet" })]),
      new Map(),
      DEFAULT_VIEW,
      640,
      480,
    );
    expect(frame.items.some((i) => i.kind === "circle")).toBe(true); // placeholder marker
    expect(frame.anchors).toHaveLength(1);
  });
});

describe("label stacking", () => {
  it("stacks overlapping labels vertically", () => {
    const placed = stackLabels([
      { objectId: "a", text: "first", x: 100, y: 80, depth: 2 },
      { objectId: "b", text: "second", x: 104, y: 82, depth: 3 },
    ]);
    expect(placed).toHaveLength(2);
    const [near, far] = placed;
    expect(near.objectId).toBe("a"); // nearer label keeps its row
    expect(far.y).toBeLessThanOrEqual(near.y - 22);
  });

  it("leaves separated labels alone and ellipsizes long text", () => {
    const placed = stackLabels([
      { objectId: "a", text: "x".repeat(80), x: 100, y: 80, depth: 1 },
      { objectId: "b", text: "far away", x: 500, y: 80, depth: 1 },
    ]);
    expect(placed.find((p) => p.objectId === "b")!.y).toBe(80);
    expect(labelText("x".repeat(80)).length).toBeLessThanOrEqual(40);
  });
});

describe("ui actions", () => {
  const base = obj("chair", { type: "splat", asset: "a" });

  it("drag maps to a move instruction with the delta applied", () => {
    const body = toInstruction({ kind: "move", object: { ...base, transform: t(1, 0, 2) }, translation: [1, 0, 0] });
    expect(body).toMatchObject({ type: "move", object_id: "chair" });
    expect((body.transform as { t: number[] }).t).toEqual([2, 0, 2]);
  });

  it("prompt on a selected splat maps to edit_object", () => {
    expect(toInstruction({ kind: "editPrompt", objectId: "chair", prompt: "make it grey" })).toEqual({
      type: "edit_object",
      object_id: "chair",
      prompt: "make it grey",
    });
  });

  it("palette click maps to an arrangement add_asset", () => {
    const body = toInstruction({ kind: "addPrimitive", shape: "cube", at: [1, 0, 1], size: 0.5 });
    expect(body).toMatchObject({ type: "add_asset", object_type: "primitive_arrangement" });
    const prims = (body.params as { primitives: { shape: string }[] }).primitives;
    expect(prims[0].shape).toBe("cube");
  });

  it("uniform scale stays positive", () => {
    const body = toInstruction({ kind: "scale", object: base, factor: 1e-9 });
    expect((body.transform as { s: number }).s).toBeGreaterThan(0);
  });
});
