import { describe, expect, it } from "vitest";

import {
  applyEvent,
  applyEvents,
  initialState,
  pendingJobs,
  staleJobIds,
  variantPanel,
  withJob,
  withScene,
} from "../src/store.js";
import type { EventMessage, JobJson, SceneJson } from "../src/types.js";

const t = { t: [0, 0, 0] as [number, number, number], r: [1, 0, 0, 0] as [number, number, number, number], s: 1 };

function sceneWith(objects: SceneJson["objects"]): SceneJson {
  return { initial_scene_ref: null, next_seq: objects.length, objects };
}

function proxyObject(id: string, prompt: string): SceneJson["objects"][number] {
  return {
    id,
    kind: { type: "proxy2d", asset: null },
    transform: t,
    anchor_bounds: { min: [-0.5, 0, -0.5], max: [0.5, 1, 0.5] },
    annotation: { prompt, instruction_type: "generate_prompt", preview_asset: null, variant_index: null },
  };
}

function job(id: string, state: JobJson["state"], variants = false): JobJson {
  return {
    id,
    instruction_id: `instr-${id}`,
    target_object_id: `obj-${id}`,
    kind: "text_to_3d_preview",
    state,
    seq: Number(id.replace(/\D/g, "")) || 0,
    variants: variants
      ? [0, 1, 2].map((i) => ({ seed: 40 + i, assets: [["preview_image", `asset-${id}-${i}`]] as [string, string][] }))
      : null,
    selected_variant: null,
    error: null,
  };
}

describe("event reduction is pure and replayable", () => {
  const events: EventMessage[] = [
    { seq: 1, kind: "scene_changed", payload: { reason: "add_asset", next_seq: 1 } },
    {
      seq: 2,
      kind: "job_state_changed",
      payload: { job_id: "j1", seq: 1, from: "submitted", to: "proxy_running", timestamp_ms: 1 },
    },
    { seq: 3, kind: "asset_added", payload: { asset_id: "a1", media_type: "model/obj" } },
  ];

  it("same events over the same base state produce identical states", () => {
    const base = withJob(initialState, job("j1", "submitted"));
    const a = applyEvents(base, events);
    const b = applyEvents(base, events);
    expect(a).toEqual(b);
    expect(a.lastEventSeq).toBe(3);
    expect(a.jobs["j1"].state).toBe("proxy_running");
    expect(a.sceneStale).toBe(true);
    expect(staleJobIds(a)).toEqual(["j1"]);
  });

  it("does not mutate the previous state", () => {
    const base = withJob(initialState, job("j1", "submitted"));
    const frozen = JSON.stringify(base);
    applyEvents(base, events);
    expect(JSON.stringify(base)).toBe(frozen);
  });

  it("reconnect replay reproduces the display model", () => {
    const base = withScene(withJob(initialState, job("j7", "proxy_ready", true)), sceneWith([proxyObject("obj-j7", "a lamp")]));
    const once = applyEvents(base, events);
    const twice = applyEvents(base, [...events, ...events.map((e) => ({ ...e }))]);
    expect(pendingJobs(once)).toEqual(pendingJobs(twice));
    expect(variantPanel(once)).toEqual(variantPanel(twice));
  });
});

describe("pending jobs panel", () => {
  it("lists every non-terminal job with its prompt", () => {
    let state = withScene(initialState, sceneWith([proxyObject("obj-j1", "a lamp")]));
    state = withJob(state, job("j1", "proxy_running"));
    state = withJob(state, job("j2", "completed"));
    state = withJob(state, job("j3", "superseded"));
    const pending = pendingJobs(state);
    expect(pending).toHaveLength(1);
    expect(pending[0]).toMatchObject({ jobId: "j1", prompt: "a lamp", state: "proxy_running" });
  });
});

describe("variant panel", () => {
  it("shows three thumbnails for a proxy-ready job", () => {
    const state = withJob(initialState, job("j1", "proxy_ready", true));
    const panel = variantPanel(state)!;
    expect(panel.jobId).toBe("j1");
    expect(panel.thumbnails).toEqual(["asset-j1-0", "asset-j1-1", "asset-j1-2"]);
  });

  it("prefers the selected object's job and hides when none ready", () => {
    let state = withJob(initialState, job("j1", "proxy_ready", true));
    state = withJob(state, job("j2", "proxy_ready", true));
    state = { ...state, selection: "obj-j2" };
    expect(variantPanel(state)!.jobId).toBe("j2");

    state = withJob(withJob(state, job("j1", "offline_queued", true)), job("j2", "completed", true));
    expect(variantPanel(state)).toBeNull();
  });

  it("scene selection survives refetch only while the object exists", () => {
    let state = { ...withScene(initialState, sceneWith([proxyObject("x", "p")])), selection: "x" };
    state = withScene(state, sceneWith([proxyObject("x", "p")]));
    expect(state.selection).toBe("x");
    state = withScene(state, sceneWith([]));
    expect(state.selection).toBeNull();
  });
});
