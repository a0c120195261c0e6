/** Outline geometry: wire-format types and quadratic curve sampling.
 *
 * The wire format is the JSON shape POST /api/layers accepts for
 * "path" geometry: a non-empty list of segments, each either
 * {kind: "line", a, b} or {kind: "bezier", a, g, b} with [x, y]
 * float pairs. Consecutive segments share endpoints and the last
 * point closes back to the first.
 */

export type Point = readonly [number, number];

export interface LineWire {
  kind: "line";
  a: [number, number];
  b: [number, number];
}

export interface BezierWire {
  kind: "bezier";
  a: [number, number];
  g: [number, number];
  b: [number, number];
}

export type SegmentWire = LineWire | BezierWire;

export function evalBezier(a: Point, g: Point, b: Point, t: number): Point {
  if (!(t >= 0 && t <= 1)) {
    throw new RangeError(`t=${t} outside [0, 1]`);
  }
  const u = 1 - t;
  const wa = u * u;
  const wg = 2 * u * t;
  const wb = t * t;
  return [wa * a[0] + wg * g[0] + wb * b[0], wa * a[1] + wg * g[1] + wb * b[1]];
}

/** Polyline preview of one curve unit: samples+1 points from a to b. */
export function sampleBezier(
  a: Point,
  g: Point,
  b: Point,
  samples = 32,
): Point[] {
  if (!Number.isInteger(samples) || samples < 1) {
    throw new RangeError(`samples must be a positive integer, got ${samples}`);
  }
  const points: Point[] = [];
  for (let i = 0; i <= samples; i++) {
    points.push(evalBezier(a, g, b, i / samples));
  }
  return points;
}

function pt(p: Point): [number, number] {
  if (!Number.isFinite(p[0]) || !Number.isFinite(p[1])) {
    throw new RangeError(`point coordinates must be finite, got [${p}]`);
  }
  return [p[0], p[1]];
}

/** Closed straight-edge outline over the given vertices (last joins first). */
export function closePolylineWire(vertices: readonly Point[]): SegmentWire[] {
  if (vertices.length < 3) {
    throw new RangeError(
      `closing a polyline needs at least 3 vertices, got ${vertices.length}`,
    );
  }
  return vertices.map((v, i) => ({
    kind: "line" as const,
    a: pt(v),
    b: pt(vertices[(i + 1) % vertices.length]!),
  }));
}

export function segmentStart(segment: SegmentWire): Point {
  return segment.a;
}

export function segmentEnd(segment: SegmentWire): Point {
  return segment.b;
}

export function samePoint(p: Point, q: Point): boolean {
  return p[0] === q[0] && p[1] === q[1];
}

/** True when the segment chain is connected and ends where it began. */
export function isClosedChain(segments: readonly SegmentWire[]): boolean {
  if (segments.length < 2) {
    return false;
  }
  for (let i = 1; i < segments.length; i++) {
    if (!samePoint(segmentEnd(segments[i - 1]!), segmentStart(segments[i]!))) {
      return false;
    }
  }
  return samePoint(segmentEnd(segments[segments.length - 1]!), segmentStart(segments[0]!));
}
