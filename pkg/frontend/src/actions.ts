// Maps user gestures to edit-instruction JSON for POST /instructions.
// Pure: returns request bodies, so the mapping is testable without a server.

import type { V3 } from "./math.js";
import type { SceneObjectJson, TransformJson } from "./types.js";

export type UiAction =
  | { kind: "move"; object: SceneObjectJson; translation: V3 }
  | { kind: "rotate"; object: SceneObjectJson; yawDelta: number }
  | { kind: "scale"; object: SceneObjectJson; factor: number }
  | { kind: "duplicate"; objectId: string }
  | { kind: "delete"; objectId: string }
  | { kind: "editPrompt"; objectId: string; prompt: string }
  | { kind: "generatePrompt"; prompt: string; at: V3 }
  | { kind: "sculptStylize"; objectId: string; prompt: string }
  | { kind: "addPrimitive"; shape: "sphere" | "cube" | "cylinder"; at: V3; size: number };

function yawQuat(current: [number, number, number, number], delta: number): [number, number, number, number] {
  // left-multiply a rotation about +y
  const half = delta / 2;
  const [qw, qx, qy, qz] = current;
  const w = Math.cos(half);
  const y = Math.sin(half);
  return [
    w * qw - y * qy,
    w * qx + y * qz,
    w * qy + y * qw,
    w * qz - y * qx,
  ];
}

function movedTransform(obj: SceneObjectJson, translation: V3): TransformJson {
  const t = obj.transform;
  return { t: [t.t[0] + translation[0], t.t[1] + translation[1], t.t[2] + translation[2]], r: t.r, s: t.s };
}

export function toInstruction(action: UiAction): Record<string, unknown> {
  switch (action.kind) {
    case "move":
      return {
        type: "move",
        object_id: action.object.id,
        transform: movedTransform(action.object, action.translation),
      };
    case "rotate": {
      const t = action.object.transform;
      return {
        type: "move",
        object_id: action.object.id,
        transform: { t: t.t, r: yawQuat(t.r, action.yawDelta), s: t.s },
      };
    }
    case "scale": {
      const t = action.object.transform;
      return {
        type: "move",
        object_id: action.object.id,
        transform: { t: t.t, r: t.r, s: Math.max(t.s * action.factor, 1e-3) },
      };
    }
    case "duplicate":
      return { type: "duplicate", object_id: action.objectId };
    case "delete":
      return { type: "delete", object_id: action.objectId };
    case "editPrompt":
      return { type: "edit_object", object_id: action.objectId, prompt: action.prompt };
    case "generatePrompt":
      return {
        type: "generate_prompt",
        prompt: action.prompt,
        transform: { t: action.at, r: [1, 0, 0, 0], s: 1 },
      };
    case "sculptStylize":
      return { type: "generate_sculpt", object_id: action.objectId, prompt: action.prompt };
    case "addPrimitive":
      return {
        type: "add_asset",
        object_type: "primitive_arrangement",
        transform: { t: action.at, r: [1, 0, 0, 0], s: 1 },
        params: {
          primitives: [
            { shape: action.shape, transform: { t: [0, 1, 0], r: [1, 0, 0, 0], s: action.size } },
          ],
        },
      };
  }
}
