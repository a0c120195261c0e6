/** Annotation tool state and its pure interaction reducers.
 *
 * The state is immutable; every interaction returns a new state. Two
 * invariants hold at all times: slider values are clamped to their
 * ranges, and the in-progress geometry of any tool is serializable to
 * the segment wire format via draftWire().
 */

import type { BezierWire, Point, SegmentWire } from "./geometry.js";
import { isClosedChain, samePoint } from "./geometry.js";
import { DEFAULT_MIN_DIST, freehandAdd } from "./freehand.js";

export type Tool = "polygon" | "bezier" | "freehand" | "threshold" | "eraser";
export type Polarity = "dark-foreground" | "bright-foreground";
export type Mode = "live" | "frozen" | "review";

export const TOOLS: readonly Tool[] = [
  "polygon",
  "bezier",
  "freehand",
  "threshold",
  "eraser",
];

/** Clicks closer than this to the first anchor close a curve chain. */
export const CLOSE_SNAP_DIST = 8.0;

export interface BezierDraft {
  readonly units: readonly BezierWire[];
  /** First click of the chain, before any unit exists. */
  readonly start: Point | null;
}

export interface ToolState {
  readonly tool: Tool;
  readonly selectedLabel: string | null;
  readonly opacity: number;
  readonly threshold: number;
  readonly polarity: Polarity;
  readonly mode: Mode;
  readonly minDist: number;
  readonly polygonDraft: readonly Point[];
  readonly freehandDraft: readonly Point[];
  readonly freehandActive: boolean;
  readonly bezierDraft: BezierDraft;
}

/** Request body for POST /api/layers. */
export interface LayerBody {
  label: string;
  polygon?: [number, number][];
  path?: SegmentWire[];
  tolerance?: number;
  threshold?: number;
  polarity?: Polarity;
  region?: SegmentWire[];
}

const EMPTY_BEZIER: BezierDraft = { units: [], start: null };

export function initialToolState(): ToolState {
  return {
    tool: "polygon",
    selectedLabel: null,
    opacity: 0.5,
    threshold: 128,
    polarity: "dark-foreground",
    mode: "live",
    minDist: DEFAULT_MIN_DIST,
    polygonDraft: [],
    freehandDraft: [],
    freehandActive: false,
    bezierDraft: EMPTY_BEZIER,
  };
}

function clearDrafts(state: ToolState): ToolState {
  return {
    ...state,
    polygonDraft: [],
    freehandDraft: [],
    freehandActive: false,
    bezierDraft: EMPTY_BEZIER,
  };
}

export function setTool(state: ToolState, tool: Tool): ToolState {
  if (!TOOLS.includes(tool)) {
    throw new RangeError(`unknown tool ${String(tool)}`);
  }
  if (tool === state.tool) {
    return state;
  }
  return { ...clearDrafts(state), tool };
}

export function setOpacity(state: ToolState, opacity: number): ToolState {
  const clamped = Number.isFinite(opacity) ? Math.min(1, Math.max(0, opacity)) : 0;
  return { ...state, opacity: clamped };
}

export function setThreshold(state: ToolState, threshold: number): ToolState {
  const clamped = Number.isFinite(threshold)
    ? Math.min(255, Math.max(0, Math.round(threshold)))
    : 0;
  return { ...state, threshold: clamped };
}

export function setPolarity(state: ToolState, polarity: Polarity): ToolState {
  if (polarity !== "dark-foreground" && polarity !== "bright-foreground") {
    throw new RangeError(`unknown polarity ${String(polarity)}`);
  }
  return { ...state, polarity };
}

export function selectLabel(state: ToolState, label: string | null): ToolState {
  return { ...state, selectedLabel: label };
}

/** Mirror the server-side session mode; a mode change drops drafts. */
export function mirrorMode(state: ToolState, mode: Mode): ToolState {
  if (mode === state.mode) {
    return state;
  }
  return { ...clearDrafts(state), mode };
}

// -- polygon tool --------------------------------------------------------

export function polygonClick(state: ToolState, p: Point): ToolState {
  return { ...state, polygonDraft: [...state.polygonDraft, p] };
}

// -- freehand tool ---------------------------------------------------------

export function freehandDown(state: ToolState, p: Point): ToolState {
  return { ...state, freehandDraft: [p], freehandActive: true };
}

export function freehandMove(state: ToolState, p: Point): ToolState {
  if (!state.freehandActive) {
    return state;
  }
  const next = freehandAdd(state.freehandDraft, p, state.minDist);
  if (next === state.freehandDraft) {
    return state;
  }
  return { ...state, freehandDraft: next };
}

export interface FreehandRelease {
  readonly state: ToolState;
  /** Vertices to commit, or null when the stroke was discarded. */
  readonly vertices: readonly Point[] | null;
  readonly notice: string | null;
}

/** End the stroke: fewer than 3 vertices is discarded with a notice. */
export function freehandUp(state: ToolState): FreehandRelease {
  const vertices = state.freehandDraft;
  const cleared = { ...state, freehandDraft: [], freehandActive: false } as ToolState;
  if (vertices.length < 3) {
    return {
      state: cleared,
      vertices: null,
      notice: `stroke discarded: ${vertices.length} vertex/vertices is not an outline`,
    };
  }
  return { state: cleared, vertices, notice: null };
}

// -- curve (bezier) tool ---------------------------------------------------

function chainAnchor(draft: BezierDraft): Point | null {
  const last = draft.units[draft.units.length - 1];
  if (last !== undefined) {
    return last.b;
  }
  return draft.start;
}

/** First click anchors the chain; each later click completes one unit
 * (control point initialized on the chord, so the preview starts
 * straight until dragged). A click near the chain's first anchor snaps
 * onto it exactly, closing the outline. */
export function bezierClick(state: ToolState, p: Point): ToolState {
  const draft = state.bezierDraft;
  const anchor = chainAnchor(draft);
  if (anchor === null) {
    return { ...state, bezierDraft: { units: [], start: p } };
  }
  let end: Point = p;
  const first = draft.units[0]?.a ?? draft.start;
  if (
    first !== null &&
    first !== undefined &&
    draft.units.length >= 1 &&
    Math.hypot(p[0] - first[0], p[1] - first[1]) <= CLOSE_SNAP_DIST
  ) {
    end = first;
  }
  const unit: BezierWire = {
    kind: "bezier",
    a: [anchor[0], anchor[1]],
    g: [(anchor[0] + end[0]) / 2, (anchor[1] + end[1]) / 2],
    b: [end[0], end[1]],
  };
  return {
    ...state,
    bezierDraft: { units: [...draft.units, unit], start: draft.start },
  };
}

/** Dragging repositions the newest unit's control point. */
export function bezierDrag(state: ToolState, p: Point): ToolState {
  const units = state.bezierDraft.units;
  const last = units[units.length - 1];
  if (last === undefined) {
    return state;
  }
  const moved: BezierWire = { ...last, g: [p[0], p[1]] };
  return {
    ...state,
    bezierDraft: {
      units: [...units.slice(0, -1), moved],
      start: state.bezierDraft.start,
    },
  };
}

export function bezierClosed(state: ToolState): boolean {
  return isClosedChain(state.bezierDraft.units);
}

// -- draft serialization and commit -----------------------------------------

function openPolylineWire(vertices: readonly Point[]): SegmentWire[] {
  const segments: SegmentWire[] = [];
  for (let i = 1; i < vertices.length; i++) {
    const a = vertices[i - 1]!;
    const b = vertices[i]!;
    segments.push({ kind: "line", a: [a[0], a[1]], b: [b[0], b[1]] });
  }
  return segments;
}

/** The in-progress geometry as wire segments (possibly empty). */
export function draftWire(state: ToolState): SegmentWire[] {
  switch (state.tool) {
    case "polygon":
      return openPolylineWire(state.polygonDraft);
    case "freehand":
      return openPolylineWire(state.freehandDraft);
    case "bezier":
      return state.bezierDraft.units.map((u) => ({ ...u }));
    case "threshold":
    case "eraser":
      return [];
  }
}

/** Whether the current draft can be committed as a layer request. */
export function canCommit(state: ToolState): boolean {
  if (state.selectedLabel === null) {
    return false;
  }
  switch (state.tool) {
    case "polygon":
      return state.polygonDraft.length >= 3;
    case "freehand":
      return !state.freehandActive && state.freehandDraft.length >= 3;
    case "bezier":
      return bezierClosed(state);
    case "threshold":
      return true;
    case "eraser":
      return false;
  }
}

/** Build the POST /api/layers body for the current draft, or null. */
export function commitBody(state: ToolState, tolerance?: number): LayerBody | null {
  if (!canCommit(state) || state.selectedLabel === null) {
    return null;
  }
  const label = state.selectedLabel;
  switch (state.tool) {
    case "polygon":
      return { label, polygon: state.polygonDraft.map((p) => [p[0], p[1]]) };
    case "freehand":
      return { label, polygon: state.freehandDraft.map((p) => [p[0], p[1]]) };
    case "bezier": {
      const body: LayerBody = { label, path: draftWire(state) };
      if (tolerance !== undefined) {
        body.tolerance = tolerance;
      }
      return body;
    }
    case "threshold":
      return { label, threshold: state.threshold, polarity: state.polarity };
    case "eraser":
      return null;
  }
}

/** Commit leaves sliders and selection alone but clears the geometry. */
export function afterCommit(state: ToolState): ToolState {
  return clearDrafts(state);
}

export { samePoint };
