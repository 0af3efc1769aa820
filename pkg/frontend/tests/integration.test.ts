// Acceptance flow against a real scene server (mock backend): annotation
// labels appear after one event round-trip, three variant thumbnails arrive
// on proxy_ready, and clicking one advances the job to offline_queued.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { toInstruction } from "../src/actions.js";
import { decodePpm } from "../src/ppm.js";
import { DEFAULT_VIEW } from "../src/math.js";
import {
  applyEvent,
  initialState,
  pendingJobs,
  variantPanel,
  withJob,
  withScene,
  type AppState,
} from "../src/store.js";
import type { EventMessage } from "../src/types.js";
import { buildDrawList } from "../src/viewport.js";

const PORT = 18700 + (process.pid % 1000);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let api: ApiClient;
let state: AppState;
const events: EventMessage[] = [];
let stopEvents: () => void;

async function waitFor<T>(probe: () => T | null | undefined, what: string, ms = 15000): Promise<T> {
  const deadline = Date.now() + ms;
  for (;;) {
    const value = probe();
    if (value) return value;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 50));
  }
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "splatforge-ui-"));
  const scenePath = join(dir, "s.json");
  writeFileSync(scenePath, '{"initial_scene_ref":null,"next_seq":0,"objects":[]}');
  server = spawn(
    "splatforge",
    ["serve", "--scene", scenePath, "--port", String(PORT), "--backend", "mock"],
    { stdio: "ignore" },
  );
  api = new ApiClient(BASE);
  await waitFor(async () => true, "noop");
  const deadline = Date.now() + 20000;
  for (;;) {
    try {
      await api.getScene();
      break;
    } catch {
      if (Date.now() > deadline) throw new Error("server did not come up");
      await new Promise((r) => setTimeout(r, 200));
    }
  }
  state = initialState;
  stopEvents = api.openEvents((ev) => {
    events.push(ev);
    state = applyEvent(state, ev);
  });
}, 30000);

afterAll(() => {
  stopEvents?.();
  server?.kill();
});

describe("live editing against the scene server", () => {
  it("shows a label within one event round-trip of submitting a prompt", async () => {
    const before = events.length;
    const { job_id } = await api.submitInstruction(
      toInstruction({ kind: "generatePrompt", prompt: "Make an ornate brass lamp", at: [0, 0, 0] }),
    );
    expect(job_id).toBeTruthy();

    await waitFor(
      () => events.slice(before).find((e) => e.kind === "scene_changed"),
      "scene_changed event",
    );
    state = withScene(state, await api.getScene());

    const frame = buildDrawList(state.scene, new Map(), DEFAULT_VIEW, 640, 480);
    expect(frame.labels.map((l) => l.text)).toContain("Make an ornate brass lamp");
    const anchor = frame.anchors[0];
    expect(frame.labels[0].y).toBeLessThan(anchor.top); // label hovers over the object

    // the pending job is visible in the jobs panel model
    state = withJob(state, await api.getJob(job_id!));
    expect(pendingJobs(state).some((j) => j.jobId === job_id)).toBe(true);
  }, 20000);

  it("shows three variant thumbnails on proxy_ready and queues on click", async () => {
    const jobId = pendingJobs(state)[0].jobId;
    await waitFor(
      () =>
        events.find(
          (e) => e.kind === "job_state_changed" && e.payload.job_id === jobId && e.payload.to === "proxy_ready",
        ),
      "proxy_ready transition",
    );
    state = withJob(state, await api.getJob(jobId));

    const panel = variantPanel(state);
    expect(panel).not.toBeNull();
    expect(panel!.thumbnails).toHaveLength(3);

    // thumbnails are fetchable, decodable preview images
    const bytes = await api.fetchAsset(panel!.thumbnails[0]!);
    const image = decodePpm(bytes);
    expect(image.width).toBeGreaterThan(0);

    const job = await api.selectVariant(jobId, 2);
    expect(job.state).toBe("offline_queued");
    expect(job.selected_variant).toBe(2);
    state = withJob(state, job);

    // scene refetch shows the annotation now carrying the chosen variant
    state = withScene(state, await api.getScene());
    const annotated = state.scene!.objects.find((o) => o.annotation?.variant_index === 2);
    expect(annotated).toBeTruthy();
  }, 20000);

  it("event seq numbers are strictly increasing", () => {
    const seqs = events.map((e) => e.seq);
    for (let i = 1; i < seqs.length; i++) expect(seqs[i]).toBeGreaterThan(seqs[i - 1]);
  });
});
