import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { freehandAdd, replayTrace } from "../src/freehand.js";
import type { Point } from "../src/geometry.js";

const fixture = JSON.parse(
  readFileSync(new URL("./fixtures/freehand_trace.json", import.meta.url), "utf-8"),
) as { min_dist: number; trace: [number, number][]; expected: [number, number][] };

describe("freehand thinning", () => {
  it("replays the recorded stylus trace to the engine's exact vertices", () => {
    const got = replayTrace(fixture.trace, fixture.min_dist);
    expect(got.length).toBe(fixture.expected.length);
    got.forEach((v, i) => {
      expect(v[0]).toBe(fixture.expected[i]![0]);
      expect(v[1]).toBe(fixture.expected[i]![1]);
    });
  });

  it("always accepts the first sample", () => {
    expect(freehandAdd([], [3.25, 4.5])).toEqual([[3.25, 4.5]]);
  });

  it("ignores micro-jitter within the distance threshold", () => {
    let vertices: readonly Point[] = [[50, 50]];
    for (let i = 0; i < 40; i++) {
      vertices = freehandAdd(vertices, [50 + Math.sin(i) * 2, 50 + Math.cos(i) * 2], 5);
    }
    expect(vertices.length).toBe(1);
  });

  it("treats exactly-at-threshold motion as not far enough (strict >)", () => {
    const kept = freehandAdd([[10, 10]], [15, 10], 5);
    expect(kept.length).toBe(1);
    const added = freehandAdd([[10, 10]], [15.000001, 10], 5);
    expect(added.length).toBe(2);
  });

  it("keeps every consecutive emitted pair farther apart than minDist", () => {
    const trace: Point[] = [];
    for (let x = 0; x <= 100; x += 1) {
      trace.push([x, 0]);
    }
    const vertices = replayTrace(trace, 5);
    expect(vertices.length).toBeGreaterThan(10);
    for (let i = 1; i < vertices.length; i++) {
      const dist = Math.hypot(
        vertices[i]![0] - vertices[i - 1]![0],
        vertices[i]![1] - vertices[i - 1]![1],
      );
      expect(dist).toBeGreaterThan(5);
    }
  });

  it("returns the same array object when nothing was added", () => {
    const vertices: readonly Point[] = [[0, 0]];
    expect(freehandAdd(vertices, [1, 1], 5)).toBe(vertices);
  });

  it("rejects non-positive distances and non-finite cursors", () => {
    expect(() => freehandAdd([], [0, 0], 0)).toThrow(RangeError);
    expect(() => freehandAdd([], [0, 0], -1)).toThrow(RangeError);
    expect(() => freehandAdd([], [Number.NaN, 0], 5)).toThrow(RangeError);
  });
});
