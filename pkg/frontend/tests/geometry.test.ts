import { describe, expect, it } from "vitest";

import {
  closePolylineWire,
  evalBezier,
  isClosedChain,
  sampleBezier,
  type Point,
  type SegmentWire,
} from "../src/geometry.js";

describe("evalBezier", () => {
  it("hits both endpoints exactly", () => {
    const a: Point = [3.5, -2];
    const g: Point = [10, 40];
    const b: Point = [-7, 8.25];
    expect(evalBezier(a, g, b, 0)).toEqual([3.5, -2]);
    expect(evalBezier(a, g, b, 1)).toEqual([-7, 8.25]);
  });

  it("pulls toward the control point at t = 0.5", () => {
    const p = evalBezier([0, 0], [10, 20], [20, 0], 0.5);
    expect(p[0]).toBeCloseTo(10, 12);
    expect(p[1]).toBeCloseTo(10, 12);
  });

  it("rejects parameters outside [0, 1]", () => {
    expect(() => evalBezier([0, 0], [1, 1], [2, 2], -0.01)).toThrow(RangeError);
    expect(() => evalBezier([0, 0], [1, 1], [2, 2], 1.01)).toThrow(RangeError);
  });
});

describe("sampleBezier", () => {
  it("draws a straight preview when the control point sits on the chord", () => {
    const a: Point = [2, 3];
    const b: Point = [42, 23];
    const g: Point = [(a[0] + b[0]) / 2, (a[1] + b[1]) / 2];
    const points = sampleBezier(a, g, b, 64);
    expect(points.length).toBe(65);
    // every sample within float noise of the chord
    const [dx, dy] = [b[0] - a[0], b[1] - a[1]];
    const len = Math.hypot(dx, dy);
    for (const p of points) {
      const cross = Math.abs((p[0] - a[0]) * dy - (p[1] - a[1]) * dx) / len;
      expect(cross).toBeLessThan(1e-9);
    }
  });

  it("validates the sample count", () => {
    expect(() => sampleBezier([0, 0], [1, 1], [2, 2], 0)).toThrow(RangeError);
    expect(() => sampleBezier([0, 0], [1, 1], [2, 2], 2.5)).toThrow(RangeError);
  });
});

describe("closePolylineWire", () => {
  it("emits one line per vertex and closes back to the start", () => {
    const wire = closePolylineWire([
      [0, 0],
      [10, 0],
      [10, 10],
      [0, 10],
    ]);
    expect(wire.length).toBe(4);
    expect(wire.every((s) => s.kind === "line")).toBe(true);
    expect(wire[3]!.b).toEqual([0, 0]);
    expect(isClosedChain(wire)).toBe(true);
  });

  it("requires at least 3 vertices and finite coordinates", () => {
    expect(() => closePolylineWire([[0, 0], [1, 1]])).toThrow(RangeError);
    expect(() =>
      closePolylineWire([
        [0, 0],
        [Number.POSITIVE_INFINITY, 1],
        [2, 2],
      ]),
    ).toThrow(RangeError);
  });
});

describe("isClosedChain", () => {
  const unit = (a: Point, b: Point): SegmentWire => ({
    kind: "bezier",
    a: [a[0], a[1]],
    g: [(a[0] + b[0]) / 2, (a[1] + b[1]) / 2],
    b: [b[0], b[1]],
  });

  it("accepts a connected loop and rejects open or broken chains", () => {
    const closed = [unit([0, 0], [10, 0]), unit([10, 0], [5, 8]), unit([5, 8], [0, 0])];
    expect(isClosedChain(closed)).toBe(true);

    const open = closed.slice(0, 2);
    expect(isClosedChain(open)).toBe(false);

    const broken = [unit([0, 0], [10, 0]), unit([10.5, 0], [0, 0])];
    expect(isClosedChain(broken)).toBe(false);

    expect(isClosedChain([])).toBe(false);
    expect(isClosedChain([unit([0, 0], [0, 0])])).toBe(false);
  });
});
