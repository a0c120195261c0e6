/** The canonical one-frame annotation flow, built from the same tool
 * reducers and API client the interactive canvas uses. The UI's button
 * handlers execute these steps one event at a time; scripting them
 * back to back must produce the same dataset entry, which is what the
 * parity tests check. State is re-fetched after every mutation; nothing
 * is assumed client-side.
 */

import type { ApiClient, SessionState } from "./api.js";
import type { Point } from "./geometry.js";
import type { Polarity, ToolState } from "./toolstate.js";
import {
  commitBody,
  freehandDown,
  freehandMove,
  freehandUp,
  initialToolState,
  mirrorMode,
  selectLabel,
  setPolarity,
  setThreshold,
  setTool,
} from "./toolstate.js";

export interface AnnotateScript {
  labels: { name: string; color: [number, number, number] }[];
  freehand: {
    label: string;
    trace: Point[];
    minDist?: number;
  };
  threshold: {
    label: string;
    value: number;
    polarity: Polarity;
  };
  instances: boolean;
}

export interface FlowResult {
  imageName: string;
  state: SessionState;
  layerIds: number[];
}

/** Add labels, freeze the live frame, trace a freehand outline, add a
 * brightness threshold layer, and save the pair. */
export async function runAnnotateFlow(
  client: ApiClient,
  script: AnnotateScript,
): Promise<FlowResult> {
  let tool: ToolState = initialToolState();
  if (script.freehand.minDist !== undefined) {
    tool = { ...tool, minDist: script.freehand.minDist };
  }

  for (const { name, color } of script.labels) {
    await client.addLabel(name, color);
    await client.state(); // re-fetch after mutation, never assume
  }

  const captured = await client.capture();
  tool = mirrorMode(tool, "frozen");
  if (captured.mode !== "frozen") {
    throw new Error(`capture left mode ${captured.mode}`);
  }

  // freehand stroke: pointer down, stream of moves, release auto-closes
  tool = setTool(tool, "freehand");
  tool = selectLabel(tool, script.freehand.label);
  const trace = script.freehand.trace;
  if (trace.length === 0) {
    throw new Error("freehand trace is empty");
  }
  tool = freehandDown(tool, trace[0]!);
  for (const sample of trace.slice(1)) {
    tool = freehandMove(tool, sample);
  }
  const released = freehandUp(tool);
  if (released.vertices === null) {
    throw new Error(released.notice ?? "stroke discarded");
  }
  // commit the stroke exactly as the pointerup handler does: the
  // released vertices become the polygon request for the active label
  const polygonBody = commitBody({
    ...released.state,
    freehandDraft: released.vertices,
  });
  tool = released.state;
  if (polygonBody === null) {
    throw new Error("freehand stroke did not produce a committable outline");
  }
  const layerIds: number[] = [];
  const first = await client.addLayer(polygonBody);
  layerIds.push(first.id);
  await client.state();

  tool = setTool(tool, "threshold");
  tool = selectLabel(tool, script.threshold.label);
  tool = setThreshold(tool, script.threshold.value);
  tool = setPolarity(tool, script.threshold.polarity);
  const thresholdBody = commitBody(tool);
  if (thresholdBody === null) {
    throw new Error("threshold draft did not produce a committable body");
  }
  const second = await client.addLayer(thresholdBody);
  layerIds.push(second.id);
  await client.state();

  const saved = await client.annotate(script.instances);
  const state = await client.state();
  return { imageName: saved.image_name, state, layerIds };
}
