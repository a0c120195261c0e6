/** Freehand vertex thinning: the pointer stream becomes a polygon.
 *
 * The rule mirrors the engine exactly: the first sample is always a
 * vertex; afterwards a sample becomes a vertex only when its distance
 * to the last accepted vertex strictly exceeds minDist. Replaying the
 * same pointer trace therefore yields the same vertex list on both
 * sides of the API.
 */

import type { Point } from "./geometry.js";

export const DEFAULT_MIN_DIST = 5.0;

/** Returns a new array when a vertex was added, else the input array. */
export function freehandAdd(
  vertices: readonly Point[],
  cursor: Point,
  minDist: number = DEFAULT_MIN_DIST,
): readonly Point[] {
  if (!(minDist > 0)) {
    throw new RangeError(`minDist must be positive, got ${minDist}`);
  }
  if (!Number.isFinite(cursor[0]) || !Number.isFinite(cursor[1])) {
    throw new RangeError(`cursor must be finite, got [${cursor}]`);
  }
  if (vertices.length === 0) {
    return [cursor];
  }
  const last = vertices[vertices.length - 1]!;
  if (Math.hypot(cursor[0] - last[0], cursor[1] - last[1]) > minDist) {
    return [...vertices, cursor];
  }
  return vertices;
}

/** Thin a whole recorded trace in one pass. */
export function replayTrace(
  trace: readonly Point[],
  minDist: number = DEFAULT_MIN_DIST,
): readonly Point[] {
  let vertices: readonly Point[] = [];
  for (const sample of trace) {
    vertices = freehandAdd(vertices, sample, minDist);
  }
  return vertices;
}
