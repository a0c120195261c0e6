/** Thin typed client for the annotation service HTTP API.
 *
 * Every method maps to one endpoint; no state is cached here. Non-2xx
 * responses throw ApiError carrying the server's error name and detail
 * verbatim so the UI can surface them unchanged.
 */

import type { LayerBody, Polarity } from "./toolstate.js";

export interface LabelEntry {
  name: string;
  color: [number, number, number];
}

export interface SourceDescriptor {
  slot: number;
  kind: string;
  location: string;
  status: "available" | "unavailable";
  default: boolean;
}

export interface LayerEntry {
  id: number;
  label: string;
  source: string;
  empty: boolean;
  popcount: number;
}

export interface SessionState {
  mode: "live" | "frozen" | "review";
  active_source: number | null;
  review_index: number | null;
  sequence: number;
  frame: { width: number; height: number } | null;
  labels: LabelEntry[];
  layers: LayerEntry[];
  dataset_count: number;
}

export interface FramePng {
  bytes: ArrayBuffer;
  sequence: number;
  mode: string;
}

export class ApiError extends Error {
  readonly status: number;
  readonly errorName: string;
  readonly detail: string;

  constructor(status: number, errorName: string, detail: string) {
    super(`${status} ${errorName}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.errorName = errorName;
    this.detail = detail;
  }
}

async function raise(response: Response): Promise<never> {
  let errorName = "HttpError";
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { error?: string; detail?: string };
    if (typeof body.error === "string") {
      errorName = body.error;
    }
    if (typeof body.detail === "string") {
      detail = body.detail;
    }
  } catch {
    // non-JSON error body: keep the status text
  }
  throw new ApiError(response.status, errorName, detail);
}

export class ApiClient {
  readonly base: string;

  constructor(base = "") {
    this.base = base.replace(/\/+$/, "");
  }

  private async json<T>(
    method: "GET" | "POST" | "DELETE",
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await fetch(this.base + path, init);
    if (!response.ok) {
      await raise(response);
    }
    return (await response.json()) as T;
  }

  private async png(path: string, body?: unknown): Promise<FramePng> {
    const init: RequestInit =
      body === undefined
        ? { method: "GET" }
        : {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
          };
    const response = await fetch(this.base + path, init);
    if (!response.ok) {
      await raise(response);
    }
    return {
      bytes: await response.arrayBuffer(),
      sequence: Number(response.headers.get("X-Sequence") ?? "0"),
      mode: response.headers.get("X-Mode") ?? "",
    };
  }

  hello(): Promise<{ service: string; api: number }> {
    return this.json("GET", "/api");
  }

  state(): Promise<SessionState> {
    return this.json("GET", "/api/state");
  }

  labels(): Promise<{ labels: LabelEntry[] }> {
    return this.json("GET", "/api/labels");
  }

  addLabel(name: string, color: [number, number, number]): Promise<{ labels: LabelEntry[] }> {
    return this.json("POST", "/api/labels", { name, color });
  }

  removeLabel(name: string): Promise<{ labels: LabelEntry[] }> {
    return this.json("DELETE", `/api/labels/${encodeURIComponent(name)}`);
  }

  sources(): Promise<{ sources: SourceDescriptor[]; active: number | null }> {
    return this.json("GET", "/api/sources");
  }

  selectSource(slot: number): Promise<{ active: number; mode: string }> {
    return this.json("POST", `/api/source/${slot}`);
  }

  frame(): Promise<FramePng> {
    return this.png("/api/frame");
  }

  capture(): Promise<{ mode: string; sequence: number; width: number; height: number }> {
    return this.json("POST", "/api/capture");
  }

  release(): Promise<{ mode: string }> {
    return this.json("POST", "/api/release");
  }

  addLayer(body: LayerBody): Promise<{ id: number; empty: boolean; popcount: number }> {
    return this.json("POST", "/api/layers", body);
  }

  deleteLayer(id: number): Promise<{ deleted: number; layers: number }> {
    return this.json("DELETE", `/api/layers/${id}`);
  }

  annotate(instances = false): Promise<{ image_name: string }> {
    return this.json("POST", "/api/annotate", { instances });
  }

  datasetList(): Promise<{ count: number; names: string[] }> {
    return this.json("GET", "/api/dataset");
  }

  review(index: number): Promise<{
    mode: string;
    index: number;
    name: string;
    width: number;
    height: number;
  }> {
    return this.json("GET", `/api/dataset/${index}`);
  }

  frequencies(includeBackground = false): Promise<{ frequencies: Record<string, number> }> {
    const query = includeBackground ? "?include_background=1" : "";
    return this.json("GET", `/api/frequencies${query}`);
  }

  thresholdPreview(threshold: number, polarity?: Polarity): Promise<FramePng> {
    const body: { threshold: number; polarity?: Polarity } = { threshold };
    if (polarity !== undefined) {
      body.polarity = polarity;
    }
    return this.png("/api/threshold", body);
  }

  blendPng(opacity: number): Promise<FramePng> {
    return this.png("/api/blend", { opacity });
  }
}
