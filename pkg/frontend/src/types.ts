// Wire types mirroring the server's JSON.

export interface TransformJson {
  t: [number, number, number];
  r: [number, number, number, number]; // scalar-first quaternion
  s: number;
}

export interface PrimitiveJson {
  shape: "sphere" | "cube" | "cylinder";
  transform: TransformJson;
}

export interface ObjectKindJson {
  type: "splat" | "mesh" | "primitive_arrangement" | "proxy2d" | "proxy3d";
  asset?: string | null;
  primitives?: PrimitiveJson[];
}

export interface AnnotationJson {
  prompt: string;
  instruction_type: string;
  preview_asset: string | null;
  variant_index: number | null;
}

export interface SceneObjectJson {
  id: string;
  kind: ObjectKindJson;
  transform: TransformJson;
  anchor_bounds: { min: [number, number, number]; max: [number, number, number] };
  annotation: AnnotationJson | null;
}

export interface SceneJson {
  initial_scene_ref: string | null;
  next_seq: number;
  objects: SceneObjectJson[];
}

export type JobStateName =
  | "submitted"
  | "proxy_running"
  | "proxy_ready"
  | "variant_selected"
  | "offline_queued"
  | "offline_running"
  | "completed"
  | "failed"
  | "superseded";

export const TERMINAL_JOB_STATES: ReadonlySet<JobStateName> = new Set([
  "completed",
  "failed",
  "superseded",
]);

export interface JobVariantJson {
  seed: number;
  assets: [string, string][]; // [role, asset id]
}

export interface JobJson {
  id: string;
  instruction_id: string;
  target_object_id: string;
  kind: string;
  state: JobStateName;
  seq: number;
  variants: JobVariantJson[] | null;
  selected_variant: number | null;
  error: string | null;
  warning?: string | null;
}

export type EventMessage =
  | { seq: number; kind: "scene_changed"; payload: { reason: string; next_seq: number } }
  | {
      seq: number;
      kind: "job_state_changed";
      payload: { job_id: string; seq: number; from: JobStateName; to: JobStateName; timestamp_ms: number };
    }
  | { seq: number; kind: "asset_added"; payload: { asset_id: string; media_type: string } };

export function variantAsset(v: JobVariantJson, role: string): string | null {
  for (const [r, id] of v.assets) if (r === role) return id;
  return null;
}
