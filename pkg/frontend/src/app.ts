/** Browser entry point: wires the canvas, panels, and status bar to the
 * annotation service. All authoritative state lives server-side; this
 * module re-fetches after every mutation and only caches decoded
 * pixels for display.
 */

import { ApiClient, ApiError } from "./api.js";
import type { SessionState } from "./api.js";
import { maskFromFullBlend, renderView } from "./canvas.js";
import type { Point, SegmentWire } from "./geometry.js";
import { sampleBezier } from "./geometry.js";
import {
  afterCommit,
  bezierClick,
  bezierDrag,
  canCommit,
  commitBody,
  draftWire,
  freehandDown,
  freehandMove,
  freehandUp,
  initialToolState,
  mirrorMode,
  polygonClick,
  selectLabel,
  setOpacity,
  setPolarity,
  setThreshold,
  setTool,
  TOOLS,
} from "./toolstate.js";
import type { Tool, ToolState } from "./toolstate.js";

const LIVE_POLL_MS = 250;
const THRESHOLD_DEBOUNCE_MS = 100;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function need<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing #${id} in index.html`);
  }
  return node as T;
}

async function decodeRgba(bytes: ArrayBuffer): Promise<{
  pixels: Uint8ClampedArray;
  width: number;
  height: number;
}> {
  const bitmap = await createImageBitmap(new Blob([bytes], { type: "image/png" }));
  const scratch = document.createElement("canvas");
  scratch.width = bitmap.width;
  scratch.height = bitmap.height;
  const ctx = scratch.getContext("2d");
  if (ctx === null) {
    throw new Error("2d canvas context unavailable");
  }
  ctx.drawImage(bitmap, 0, 0);
  bitmap.close();
  const data = ctx.getImageData(0, 0, scratch.width, scratch.height);
  return { pixels: new Uint8ClampedArray(data.data), width: data.width, height: data.height };
}

class App {
  private readonly client = new ApiClient("");
  private tool: ToolState = initialToolState();
  private session: SessionState | null = null;
  private frame: { pixels: Uint8ClampedArray; width: number; height: number } | null = null;
  private mask: Uint8ClampedArray | null = null;
  private thresholdOverlay: ImageBitmap | null = null;
  private busy = false;
  private pollTimer: number | null = null;
  private thresholdTimer: number | null = null;

  private readonly canvas = need<HTMLCanvasElement>("canvas");
  private readonly status = need<HTMLDivElement>("status");
  private readonly banner = need<HTMLDivElement>("banner");
  private readonly labelsBox = need<HTMLDivElement>("labels");
  private readonly layersBox = need<HTMLDivElement>("layers");
  private readonly sourcesBox = need<HTMLDivElement>("sources");
  private readonly toolsBox = need<HTMLDivElement>("tools");
  private readonly modeBox = need<HTMLSpanElement>("mode");
  private readonly datasetBox = need<HTMLSpanElement>("dataset-pos");

  async start(): Promise<void> {
    this.bindPanels();
    this.bindPointer();
    await this.refresh();
    this.schedulePoll();
  }

  // -- server synchronization ---------------------------------------

  /** Re-read state, frame, and committed-layer colors from the server. */
  private async refresh(): Promise<void> {
    try {
      const state = await this.client.state();
      this.session = state;
      this.tool = mirrorMode(this.tool, state.mode);
      if (
        this.tool.selectedLabel === null &&
        state.labels.length > 0 &&
        state.labels[0] !== undefined
      ) {
        this.tool = selectLabel(this.tool, state.labels[0].name);
      }
      const png = await this.client.frame();
      this.frame = await decodeRgba(png.bytes);
      if (state.layers.length > 0 && state.mode !== "live") {
        const full = await this.client.blendPng(1.0);
        const blend = await decodeRgba(full.bytes);
        this.mask = maskFromFullBlend(this.frame.pixels, blend.pixels);
      } else {
        this.mask = null;
      }
      this.banner.hidden = true;
      this.renderPanels();
      this.draw();
    } catch (err) {
      this.report(err);
    }
  }

  /** Run one mutation at a time, then re-fetch everything. */
  private async mutate(action: () => Promise<unknown>): Promise<void> {
    if (this.busy) {
      return;
    }
    this.busy = true;
    try {
      await action();
      this.status.textContent = "";
      await this.refresh();
    } catch (err) {
      this.report(err);
    } finally {
      this.busy = false;
    }
  }

  private report(err: unknown): void {
    if (err instanceof ApiError) {
      this.status.textContent = err.message;
      this.banner.hidden = err.status !== 503;
    } else {
      this.status.textContent = String(err);
    }
  }

  private schedulePoll(): void {
    if (this.pollTimer !== null) {
      window.clearTimeout(this.pollTimer);
    }
    this.pollTimer = window.setTimeout(() => {
      void this.pollLive().finally(() => this.schedulePoll());
    }, LIVE_POLL_MS);
  }

  private async pollLive(): Promise<void> {
    if (this.session?.mode !== "live" || this.busy) {
      return;
    }
    try {
      const png = await this.client.frame();
      this.frame = await decodeRgba(png.bytes);
      this.banner.hidden = true;
      this.draw();
    } catch (err) {
      this.report(err);
    }
  }

  // -- canvas ---------------------------------------------------------

  private draw(): void {
    if (this.frame === null) {
      return;
    }
    const { width, height } = this.frame;
    if (this.canvas.width !== width || this.canvas.height !== height) {
      this.canvas.width = width;
      this.canvas.height = height;
    }
    const ctx = this.canvas.getContext("2d");
    if (ctx === null) {
      return;
    }
    const view = renderView(this.frame.pixels, this.mask, this.tool.opacity);
    ctx.putImageData(new ImageData(view, width, height), 0, 0);
    if (this.thresholdOverlay !== null && this.tool.tool === "threshold") {
      ctx.save();
      ctx.globalAlpha = 0.45;
      ctx.drawImage(this.thresholdOverlay, 0, 0);
      ctx.restore();
    }
    this.drawDraft(ctx);
  }

  private drawDraft(ctx: CanvasRenderingContext2D): void {
    const segments = draftWire(this.tool);
    if (segments.length === 0 && this.tool.polygonDraft.length < 2) {
      return;
    }
    ctx.save();
    ctx.strokeStyle = "#00e5ff";
    ctx.fillStyle = "#00e5ff";
    ctx.lineWidth = 1.5;
    for (const segment of segments) {
      ctx.beginPath();
      if (segment.kind === "line") {
        ctx.moveTo(segment.a[0], segment.a[1]);
        ctx.lineTo(segment.b[0], segment.b[1]);
      } else {
        const points = sampleBezier(segment.a, segment.g, segment.b, 24);
        ctx.moveTo(points[0]![0], points[0]![1]);
        for (const p of points.slice(1)) {
          ctx.lineTo(p[0], p[1]);
        }
      }
      ctx.stroke();
    }
    for (const p of this.draftHandles(segments)) {
      ctx.beginPath();
      ctx.arc(p[0], p[1], 2.5, 0, Math.PI * 2);
      ctx.fill();
    }
    ctx.restore();
  }

  private draftHandles(segments: SegmentWire[]): Point[] {
    const handles: Point[] = [];
    if (this.tool.tool === "polygon") {
      handles.push(...this.tool.polygonDraft);
    } else if (this.tool.tool === "bezier") {
      for (const segment of segments) {
        handles.push(segment.a, segment.b);
        if (segment.kind === "bezier") {
          handles.push(segment.g);
        }
      }
      if (this.tool.bezierDraft.start !== null && segments.length === 0) {
        handles.push(this.tool.bezierDraft.start);
      }
    }
    return handles;
  }

  private canvasPoint(event: PointerEvent): Point {
    const rect = this.canvas.getBoundingClientRect();
    const x = ((event.clientX - rect.left) / rect.width) * this.canvas.width;
    const y = ((event.clientY - rect.top) / rect.height) * this.canvas.height;
    return [x, y];
  }

  private bindPointer(): void {
    let dragging = false;
    this.canvas.addEventListener("pointerdown", (event) => {
      const p = this.canvasPoint(event);
      if (this.tool.tool === "freehand") {
        this.tool = freehandDown(this.tool, p);
        this.canvas.setPointerCapture(event.pointerId);
      } else if (this.tool.tool === "bezier") {
        this.tool = bezierClick(this.tool, p);
        dragging = true;
        this.canvas.setPointerCapture(event.pointerId);
      } else if (this.tool.tool === "polygon") {
        this.tool = polygonClick(this.tool, p);
      }
      this.draw();
    });
    this.canvas.addEventListener("pointermove", (event) => {
      const p = this.canvasPoint(event);
      if (this.tool.tool === "freehand" && this.tool.freehandActive) {
        this.tool = freehandMove(this.tool, p);
        this.draw();
      } else if (this.tool.tool === "bezier" && dragging) {
        this.tool = bezierDrag(this.tool, p);
        this.draw();
      }
    });
    this.canvas.addEventListener("pointerup", (event) => {
      dragging = false;
      if (this.tool.tool === "freehand" && this.tool.freehandActive) {
        const released = freehandUp(this.tool);
        if (released.vertices === null) {
          this.tool = released.state;
          this.status.textContent = released.notice ?? "";
          this.draw();
          return;
        }
        const body = commitBody({
          ...released.state,
          freehandDraft: released.vertices,
        });
        this.tool = released.state;
        if (body !== null) {
          void this.mutate(() => this.client.addLayer(body));
        }
      }
      this.canvas.releasePointerCapture(event.pointerId);
    });
    this.canvas.addEventListener("dblclick", () => {
      if (this.tool.tool === "polygon" || this.tool.tool === "bezier") {
        this.commitDraft();
      }
    });
  }

  private commitDraft(): void {
    if (!canCommit(this.tool)) {
      this.status.textContent = "outline not committable yet (close it first)";
      return;
    }
    const body = commitBody(this.tool);
    if (body === null) {
      return;
    }
    this.tool = afterCommit(this.tool);
    void this.mutate(() => this.client.addLayer(body));
  }

  // -- panels -----------------------------------------------------------

  private bindPanels(): void {
    for (const tool of TOOLS) {
      const button = el("button", "tool", tool);
      button.id = `tool-${tool}`;
      button.addEventListener("click", () => {
        this.tool = setTool(this.tool, tool);
        this.renderPanels();
        this.draw();
        if (tool === "threshold") {
          this.queueThresholdPreview();
        }
      });
      this.toolsBox.append(button);
    }

    need<HTMLInputElement>("opacity").addEventListener("input", (event) => {
      const value = Number((event.target as HTMLInputElement).value) / 100;
      this.tool = setOpacity(this.tool, value);
      this.draw();
    });
    need<HTMLInputElement>("threshold").addEventListener("input", (event) => {
      const value = Number((event.target as HTMLInputElement).value);
      this.tool = setThreshold(this.tool, value);
      need<HTMLSpanElement>("threshold-value").textContent = String(this.tool.threshold);
      this.queueThresholdPreview();
    });
    need<HTMLSelectElement>("polarity").addEventListener("change", (event) => {
      const value = (event.target as HTMLSelectElement).value;
      if (value === "dark-foreground" || value === "bright-foreground") {
        this.tool = setPolarity(this.tool, value);
        this.queueThresholdPreview();
      }
    });

    need<HTMLButtonElement>("capture").addEventListener("click", () => {
      void this.mutate(() => this.client.capture());
    });
    need<HTMLButtonElement>("release").addEventListener("click", () => {
      void this.mutate(() => this.client.release());
    });
    need<HTMLButtonElement>("commit").addEventListener("click", () => {
      if (this.tool.tool === "threshold") {
        const body = commitBody(this.tool);
        if (body !== null) {
          void this.mutate(() => this.client.addLayer(body));
        }
      } else {
        this.commitDraft();
      }
    });
    need<HTMLButtonElement>("annotate").addEventListener("click", () => {
      const stackSize = this.session?.layers.length ?? 0;
      if (stackSize === 0 && !window.confirm("No layers: save a background-only pair?")) {
        return;
      }
      const instances = need<HTMLInputElement>("instances").checked;
      void this.mutate(() => this.client.annotate(instances));
    });

    need<HTMLButtonElement>("nav-prev").addEventListener("click", () => {
      this.navigate(-1);
    });
    need<HTMLButtonElement>("nav-next").addEventListener("click", () => {
      this.navigate(1);
    });

    const addLabel = need<HTMLButtonElement>("add-label");
    addLabel.addEventListener("click", () => {
      const name = need<HTMLInputElement>("label-name").value.trim();
      const hex = need<HTMLInputElement>("label-color").value;
      const color: [number, number, number] = [
        parseInt(hex.slice(1, 3), 16),
        parseInt(hex.slice(3, 5), 16),
        parseInt(hex.slice(5, 7), 16),
      ];
      void this.mutate(() => this.client.addLabel(name, color));
    });
  }

  private navigate(step: number): void {
    const state = this.session;
    if (state === null || state.dataset_count === 0) {
      return;
    }
    const current = state.review_index ?? state.dataset_count;
    const target = current + step;
    if (target >= state.dataset_count) {
      return;
    }
    if (target < 0) {
      void this.mutate(() => this.client.release());
      return;
    }
    void this.mutate(() => this.client.review(target));
  }

  private queueThresholdPreview(): void {
    if (this.thresholdTimer !== null) {
      window.clearTimeout(this.thresholdTimer);
    }
    this.thresholdTimer = window.setTimeout(() => {
      void (async () => {
        if (this.tool.tool !== "threshold") {
          return;
        }
        try {
          const png = await this.client.thresholdPreview(
            this.tool.threshold,
            this.tool.polarity,
          );
          this.thresholdOverlay = await createImageBitmap(
            new Blob([png.bytes], { type: "image/png" }),
          );
          this.draw();
        } catch (err) {
          this.report(err);
        }
      })();
    }, THRESHOLD_DEBOUNCE_MS);
  }

  private renderPanels(): void {
    const state = this.session;
    if (state === null) {
      return;
    }
    this.modeBox.textContent = state.mode;
    this.datasetBox.textContent =
      state.review_index !== null
        ? `${state.review_index + 1} / ${state.dataset_count}`
        : `live+${state.dataset_count} saved`;

    const next = need<HTMLButtonElement>("nav-next");
    const prev = need<HTMLButtonElement>("nav-prev");
    const atEnd =
      state.dataset_count === 0 ||
      (state.review_index !== null && state.review_index + 1 >= state.dataset_count);
    next.disabled = atEnd;
    prev.disabled = state.dataset_count === 0;

    this.labelsBox.replaceChildren();
    for (const label of state.labels) {
      const row = el("div", "row");
      const swatch = el("span", "swatch");
      swatch.style.background = `rgb(${label.color.join(",")})`;
      const pick = el("button", "pick", label.name);
      pick.addEventListener("click", () => {
        this.tool = selectLabel(this.tool, label.name);
        this.renderPanels();
      });
      if (this.tool.selectedLabel === label.name) {
        row.classList.add("selected");
      }
      const del = el("button", "delete", "x");
      del.title = `remove label ${label.name}`;
      del.addEventListener("click", () => {
        void this.mutate(() => this.client.removeLabel(label.name));
      });
      row.append(swatch, pick, del);
      this.labelsBox.append(row);
    }

    this.layersBox.replaceChildren();
    for (const layer of state.layers) {
      const row = el("div", "row");
      const text = el(
        "span",
        "layer-info",
        `#${layer.id} ${layer.label} (${layer.source}, ${layer.popcount} px)`,
      );
      row.append(text);
      if (this.tool.tool === "eraser") {
        row.classList.add("erasable");
        row.addEventListener("click", () => {
          void this.mutate(() => this.client.deleteLayer(layer.id));
        });
      } else {
        const del = el("button", "delete", "x");
        del.addEventListener("click", () => {
          void this.mutate(() => this.client.deleteLayer(layer.id));
        });
        row.append(del);
      }
      this.layersBox.append(row);
    }

    void this.renderSources();

    for (const tool of TOOLS) {
      const button = document.getElementById(`tool-${tool}`);
      button?.classList.toggle("active", tool === this.tool.tool);
    }
  }

  private async renderSources(): Promise<void> {
    try {
      const listing = await this.client.sources();
      this.sourcesBox.replaceChildren();
      for (const source of listing.sources) {
        const row = el("div", "row");
        const button = el(
          "button",
          "pick",
          `${source.slot}: ${source.kind} ${source.location} [${source.status}]`,
        );
        if (listing.active === source.slot) {
          row.classList.add("selected");
        }
        button.addEventListener("click", () => {
          void this.mutate(() => this.client.selectSource(source.slot));
        });
        row.append(button);
        this.sourcesBox.append(row);
      }
    } catch (err) {
      this.report(err);
    }
  }
}

const app = new App();
void app.start();
