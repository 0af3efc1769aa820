// HTTP client for the scene server. The event stream is read over fetch so
// the same code runs in the browser and in node-based tests.

import type { EventMessage, JobJson, SceneJson } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function jsonOrThrow(response: Response): Promise<any> {
  if (!response.ok) {
    let code = `HTTP_${response.status}`;
    let message = response.statusText;
    try {
      const body = await response.json();
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body
    }
    throw new ApiError(response.status, code, message);
  }
  return response.json();
}

export class ApiClient {
  constructor(public baseUrl: string = "") {}

  async getScene(): Promise<SceneJson> {
    return jsonOrThrow(await fetch(`${this.baseUrl}/scene`));
  }

  async submitInstruction(body: Record<string, unknown>): Promise<{ job_id: string | null; applied: boolean }> {
    return jsonOrThrow(
      await fetch(`${this.baseUrl}/instructions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  async getJob(jobId: string): Promise<JobJson> {
    return jsonOrThrow(await fetch(`${this.baseUrl}/jobs/${jobId}`));
  }

  async listJobs(): Promise<JobJson[]> {
    return jsonOrThrow(await fetch(`${this.baseUrl}/jobs`));
  }

  async selectVariant(jobId: string, index: number): Promise<JobJson> {
    return jsonOrThrow(
      await fetch(`${this.baseUrl}/jobs/${jobId}/variant`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ index }),
      }),
    );
  }

  async snapshot(camera: Record<string, unknown>, prompt: string): Promise<{ job_id: string }> {
    return jsonOrThrow(
      await fetch(`${this.baseUrl}/snapshot`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ camera, prompt }),
      }),
    );
  }

  async runOffline(): Promise<{ processed: number }> {
    return jsonOrThrow(await fetch(`${this.baseUrl}/offline/run`, { method: "POST" }));
  }

  assetUrl(assetId: string): string {
    return `${this.baseUrl}/assets/${assetId}`;
  }

  async fetchAsset(assetId: string): Promise<Uint8Array> {
    const response = await fetch(this.assetUrl(assetId));
    if (!response.ok) throw new ApiError(response.status, "MissingAsset", assetId);
    return new Uint8Array(await response.arrayBuffer());
  }

  /** Subscribe to the SSE stream; returns a stop function. */
  openEvents(
    onEvent: (ev: EventMessage) => void,
    onClose?: () => void,
    limit?: number,
  ): () => void {
    const controller = new AbortController();
    const qs = limit ? `?limit=${limit}` : "";
    (async () => {
      try {
        const response = await fetch(`${this.baseUrl}/events${qs}`, {
          signal: controller.signal,
        });
        const reader = response.body!.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { value, done } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          let nl: number;
          while ((nl = buffer.indexOf("\n")) >= 0) {
            const line = buffer.slice(0, nl).trimEnd();
            buffer = buffer.slice(nl + 1);
            if (line.startsWith("data: ")) {
              onEvent(JSON.parse(line.slice(6)) as EventMessage);
            }
          }
        }
      } catch {
        // aborted or connection dropped; the app may resubscribe
      } finally {
        onClose?.();
      }
    })();
    return () => controller.abort();
  }
}
