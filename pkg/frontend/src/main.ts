// App wiring: event-stream subscription, scene/job refetching, canvas loop,
// and the control panels (prompt entry, sculpt palette, variant picker,
// magic camera, jobs list). All state transitions go through store.ts.

import { ApiClient } from "./api.js";
import { toInstruction, type UiAction } from "./actions.js";
import { cameraPoseQuat, clampView, orbitCamera, type V3 } from "./math.js";
import { parseObjWireframe } from "./obj.js";
import { decodePpm } from "./ppm.js";
import { parseSplatPoints } from "./splats.js";
import {
  applyEvent,
  initialState,
  pendingJobs,
  staleJobIds,
  variantPanel,
  withJob,
  withScene,
  type AppState,
} from "./store.js";
import type { SceneJson } from "./types.js";
import { buildDrawList, paint, pickObject, type AssetCache, type Frame } from "./viewport.js";

const api = new ApiClient("");
let state: AppState = initialState;
const assets: AssetCache = new Map();
const assetFetches = new Set<string>();
let frame: Frame = { items: [], labels: [], anchors: [] };

const canvas = document.getElementById("viewport") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const promptInput = document.getElementById("prompt") as HTMLInputElement;
const toastBox = document.getElementById("toast")!;
const jobsBox = document.getElementById("jobs")!;
const variantsBox = document.getElementById("variants")!;
const selectionBox = document.getElementById("selection")!;

function setState(next: AppState) {
  state = next;
  syncServerState();
  renderPanels();
}

function toast(message: string) {
  toastBox.textContent = message;
  toastBox.classList.add("visible");
  setTimeout(() => toastBox.classList.remove("visible"), 4000);
}

async function syncServerState() {
  if (state.sceneStale) {
    state = { ...state, sceneStale: false };
    try {
      const scene = await api.getScene();
      state = withScene(state, scene);
      requestAssets(scene);
      renderPanels();
    } catch (e) {
      toast(`scene fetch failed: ${e}`);
    }
  }
  for (const jobId of staleJobIds(state)) {
    state = { ...state, jobsStale: { ...state.jobsStale } };
    delete state.jobsStale[jobId];
    api
      .getJob(jobId)
      .then((job) => setState(withJob(state, job)))
      .catch(() => undefined);
  }
}

function requestAssets(scene: SceneJson) {
  for (const obj of scene.objects) {
    const ids: (string | null | undefined)[] = [obj.kind.asset, obj.annotation?.preview_asset];
    for (const id of ids) {
      if (!id || assets.has(id) || assetFetches.has(id)) continue;
      assetFetches.add(id);
      api
        .fetchAsset(id)
        .then((bytes) => {
          if (bytes[0] === 0x50 && bytes[1] === 0x36) {
            assets.set(id, { kind: "image", image: decodePpm(bytes) });
          } else if (bytes[0] === 0x70 && bytes[1] === 0x6c && bytes[2] === 0x79) {
            assets.set(id, { kind: "splat", points: parseSplatPoints(bytes) });
          } else {
            assets.set(id, { kind: "mesh", mesh: parseObjWireframe(new TextDecoder().decode(bytes)) });
          }
        })
        .catch(() => undefined)
        .finally(() => assetFetches.delete(id));
    }
  }
}

async function submit(action: UiAction) {
  try {
    await api.submitInstruction(toInstruction(action));
  } catch (e) {
    toast(`${e}`);
  }
}

// -- panels -----------------------------------------------------------------

function renderPanels() {
  const selected = state.selection
    ? state.scene?.objects.find((o) => o.id === state.selection)
    : undefined;
  selectionBox.textContent = selected
    ? `${selected.kind.type} ${selected.id.slice(0, 8)}` +
      (selected.annotation ? ` — "${selected.annotation.prompt}"` : "")
    : "nothing selected";

  const pending = pendingJobs(state);
  jobsBox.innerHTML = pending.length
    ? pending
        .map(
          (j) =>
            `<div class="job"><span class="state ${j.state}">${j.state}</span> ` +
            `${escapeHtml(j.prompt || j.targetObjectId.slice(0, 8))}</div>`,
        )
        .join("")
    : '<div class="job none">no pending jobs</div>';

  const panel = variantPanel(state);
  if (!panel) {
    variantsBox.innerHTML = "";
    variantsBox.classList.remove("visible");
  } else {
    variantsBox.classList.add("visible");
    variantsBox.innerHTML =
      "<span>pick a variant:</span>" +
      panel.thumbnails
        .map(
          (asset, i) =>
            `<img data-index="${i}" ${panel.selected === i ? 'class="selected"' : ""} ` +
            `src="${asset ? api.assetUrl(asset) : ""}" alt="variant ${i}">`,
        )
        .join("");
    variantsBox.querySelectorAll("img").forEach((img) => {
      img.addEventListener("click", async () => {
        try {
          const job = await api.selectVariant(panel.jobId, Number(img.dataset.index));
          setState(withJob(state, job));
        } catch (e) {
          toast(`${e}`);
        }
      });
    });
  }
}

function escapeHtml(s: string): string {
  return s.replace(/[&<>"]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" })[c]!);
}

// -- viewport interaction -----------------------------------------------------

let dragging: { button: number; lastX: number; lastY: number; moved: boolean } | null = null;

canvas.addEventListener("mousedown", (e) => {
  dragging = { button: e.button, lastX: e.offsetX, lastY: e.offsetY, moved: false };
});

canvas.addEventListener("mousemove", (e) => {
  if (!dragging) return;
  const dx = e.offsetX - dragging.lastX;
  const dy = e.offsetY - dragging.lastY;
  dragging.lastX = e.offsetX;
  dragging.lastY = e.offsetY;
  if (Math.abs(dx) + Math.abs(dy) > 1) dragging.moved = true;

  if (dragging.button === 0 && state.selection && !e.shiftKey) {
    // drag the selected object in the ground plane (camera-relative)
    const obj = state.scene?.objects.find((o) => o.id === state.selection);
    if (!obj) return;
    const cam = orbitCamera(state.view);
    const k = 0.004 * state.view.distance;
    const translation: V3 = [
      (cam.right[0] * dx - cam.forward[0] * dy) * k,
      0,
      (cam.right[2] * dx - cam.forward[2] * dy) * k,
    ];
    void submit({ kind: "move", object: obj, translation });
  } else {
    state = {
      ...state,
      view: clampView({
        ...state.view,
        yaw: state.view.yaw - dx * 0.008,
        pitch: state.view.pitch + dy * 0.008,
      }),
    };
  }
});

canvas.addEventListener("mouseup", (e) => {
  if (dragging && !dragging.moved && e.button === 0) {
    const picked = pickObject(frame, e.offsetX, e.offsetY);
    setState({ ...state, selection: picked });
  }
  dragging = null;
});

canvas.addEventListener("wheel", (e) => {
  e.preventDefault();
  state = {
    ...state,
    view: clampView({ ...state.view, distance: state.view.distance * (e.deltaY > 0 ? 1.1 : 0.9) }),
  };
});

// -- toolbar ------------------------------------------------------------------

document.getElementById("submit-prompt")!.addEventListener("click", () => {
  const prompt = promptInput.value.trim();
  if (!prompt) return toast("enter a prompt first");
  const selected = state.scene?.objects.find((o) => o.id === state.selection);
  if (selected && selected.kind.type === "splat") {
    void submit({ kind: "editPrompt", objectId: selected.id, prompt });
  } else if (selected && selected.kind.type === "primitive_arrangement") {
    void submit({ kind: "sculptStylize", objectId: selected.id, prompt });
  } else {
    void submit({ kind: "generatePrompt", prompt, at: [0, 0, 0] });
  }
  promptInput.value = "";
});

for (const shape of ["sphere", "cube", "cylinder"] as const) {
  document.getElementById(`add-${shape}`)!.addEventListener("click", () => {
    void submit({ kind: "addPrimitive", shape, at: [0, 0, 0], size: 0.5 });
  });
}

document.getElementById("duplicate")!.addEventListener("click", () => {
  if (state.selection) void submit({ kind: "duplicate", objectId: state.selection });
});

document.getElementById("delete")!.addEventListener("click", () => {
  if (state.selection) void submit({ kind: "delete", objectId: state.selection });
});

document.getElementById("magic-camera")!.addEventListener("click", async () => {
  const prompt = promptInput.value.trim();
  if (!prompt) return toast("enter a stylization prompt first");
  const cam = orbitCamera(state.view);
  try {
    await api.snapshot(
      {
        position: cam.eye,
        rotation: cameraPoseQuat(cam),
        fov_y: state.view.fovY,
        width: 512,
        height: 512,
      },
      prompt,
    );
    promptInput.value = "";
  } catch (e) {
    toast(`${e}`);
  }
});

document.getElementById("run-offline")!.addEventListener("click", async () => {
  try {
    const { processed } = await api.runOffline();
    toast(`offline pass processed ${processed} job(s)`);
  } catch (e) {
    toast(`${e}`);
  }
});

// -- boot ---------------------------------------------------------------------

api.openEvents((ev) => setState(applyEvent(state, ev)));
setState({ ...state, sceneStale: true });

function loop() {
  const w = (canvas.width = canvas.clientWidth);
  const h = (canvas.height = canvas.clientHeight);
  frame = buildDrawList(state.scene, assets, state.view, w, h, state.selection);
  paint(ctx, frame, w, h);
  if (state.scene) requestAssets(state.scene);
  requestAnimationFrame(loop);
}
requestAnimationFrame(loop);
