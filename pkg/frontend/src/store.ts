// Application state as a pure function of (last scene fetch, event stream,
// local view state). Reducers never mutate; replaying the same events over
// the same base state reproduces the same display model, which is what makes
// reconnects safe.

import type { ViewState } from "./math.js";
import { DEFAULT_VIEW } from "./math.js";
import type {
  EventMessage,
  JobJson,
  JobStateName,
  SceneJson,
} from "./types.js";
import { TERMINAL_JOB_STATES, variantAsset } from "./types.js";

export interface AppState {
  scene: SceneJson | null;
  sceneStale: boolean; // a scene_changed event arrived after the last fetch
  jobs: Record<string, JobJson>;
  jobsStale: Record<string, boolean>; // job ids whose record needs a refetch
  lastEventSeq: number;
  selection: string | null;
  view: ViewState;
  toast: string | null;
}

export const initialState: AppState = {
  scene: null,
  sceneStale: true,
  jobs: {},
  jobsStale: {},
  lastEventSeq: 0,
  selection: null,
  view: DEFAULT_VIEW,
  toast: null,
};

export function withScene(state: AppState, scene: SceneJson): AppState {
  const ids = new Set(scene.objects.map((o) => o.id));
  return {
    ...state,
    scene,
    sceneStale: false,
    selection: state.selection && ids.has(state.selection) ? state.selection : null,
  };
}

export function withJob(state: AppState, job: JobJson): AppState {
  const jobsStale = { ...state.jobsStale };
  delete jobsStale[job.id];
  return { ...state, jobs: { ...state.jobs, [job.id]: job }, jobsStale };
}

export function applyEvent(state: AppState, ev: EventMessage): AppState {
  const base = { ...state, lastEventSeq: Math.max(state.lastEventSeq, ev.seq) };
  switch (ev.kind) {
    case "scene_changed":
      return { ...base, sceneStale: true };
    case "job_state_changed": {
      const { job_id, to } = ev.payload;
      const existing = state.jobs[job_id];
      const jobs = existing
        ? { ...state.jobs, [job_id]: { ...existing, state: to } }
        : state.jobs;
      // variants and errors ride on the job record, not the event
      return { ...base, jobs, jobsStale: { ...state.jobsStale, [job_id]: true } };
    }
    case "asset_added":
      return base;
  }
}

export function applyEvents(state: AppState, events: EventMessage[]): AppState {
  return events.reduce(applyEvent, state);
}

// ---------------------------------------------------------------------------
// derived display models

export interface PendingJobView {
  jobId: string;
  state: JobStateName;
  targetObjectId: string;
  prompt: string;
  error: string | null;
}

/** Every non-terminal job must be visible somewhere; this is that list. */
export function pendingJobs(state: AppState): PendingJobView[] {
  const prompts = new Map<string, string>();
  for (const obj of state.scene?.objects ?? []) {
    if (obj.annotation) prompts.set(obj.id, obj.annotation.prompt);
  }
  return Object.values(state.jobs)
    .filter((j) => !TERMINAL_JOB_STATES.has(j.state))
    .sort((a, b) => a.seq - b.seq)
    .map((j) => ({
      jobId: j.id,
      state: j.state,
      targetObjectId: j.target_object_id,
      prompt: prompts.get(j.target_object_id) ?? "",
      error: j.error,
    }));
}

export interface VariantPanelView {
  jobId: string;
  thumbnails: (string | null)[]; // preview asset ids, one per variant
  selected: number | null;
}

/** The three-thumbnail picker for the selected object's proxy-ready job. */
export function variantPanel(state: AppState): VariantPanelView | null {
  const selectable = Object.values(state.jobs)
    .filter((j) => j.state === "proxy_ready" && j.variants)
    .sort((a, b) => b.seq - a.seq);
  const job = state.selection
    ? selectable.find((j) => j.target_object_id === state.selection) ?? selectable[0]
    : selectable[0];
  if (!job || !job.variants) return null;
  return {
    jobId: job.id,
    thumbnails: job.variants.map((v) => variantAsset(v, "preview_image")),
    selected: job.selected_variant,
  };
}

/** Ids of job records that must be (re)fetched to render the current state. */
export function staleJobIds(state: AppState): string[] {
  return Object.keys(state.jobsStale);
}
