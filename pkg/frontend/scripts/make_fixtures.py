"""Regenerate the JSON fixtures under tests/fixtures/.

The browser client must reproduce three engine behaviors exactly:
overlay blending, freehand vertex thinning, and the wire format the
curve tool commits. Each fixture freezes engine output for one of
those, so the TypeScript tests can compare without talking to Python.

Run from anywhere: python3 frontend/scripts/make_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from maskstack import (
    blend_preview,
    fill_polygon,
    flatten_path,
    freehand_add,
    path_from_wire,
)

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def blend_cases() -> dict:
    rng = np.random.default_rng(20260814)
    palette = [(0, 255, 0), (255, 8, 8), (23, 54, 255), (211, 179, 145)]
    cases = []
    for width, height in ((9, 7), (16, 12)):
        frame = rng.integers(0, 256, (height, width, 3), dtype=np.uint8)
        cmask = np.zeros_like(frame)
        for color in palette:
            support = rng.random((height, width)) < 0.22
            cmask[support] = color
        # a covered pixel whose mask color equals the frame color:
        # blending must be the identity there at every opacity
        frame[0, 0] = palette[0]
        cmask[0, 0] = palette[0]
        for opacity in (0.0, 0.25, 0.37, 0.5, 0.73, 1.0):
            expected = blend_preview(frame, cmask, opacity)
            cases.append({
                "width": width,
                "height": height,
                "opacity": opacity,
                "frame": frame.ravel().tolist(),
                "mask": cmask.ravel().tolist(),
                "expected": expected.ravel().tolist(),
            })
    return {"cases": cases}


def freehand_fixture() -> dict:
    rng = np.random.default_rng(99)
    min_dist = 5.0
    trace: list[tuple[float, float]] = []
    # a wobbly loop sampled much denser than the thinning distance
    for i in range(260):
        t = 2.0 * np.pi * i / 260.0
        r = 58.0 + 9.0 * np.sin(3.0 * t)
        x = 140.0 + r * np.cos(t) + float(rng.uniform(-0.7, 0.7))
        y = 110.0 + r * np.sin(t) + float(rng.uniform(-0.7, 0.7))
        trace.append((x, y))
    # a burst of micro-jitter that must add no vertices
    jx, jy = trace[-1]
    for _ in range(25):
        trace.append((jx + float(rng.uniform(-1.5, 1.5)),
                      jy + float(rng.uniform(-1.5, 1.5))))
    # an exactly-at-threshold step: distance == min_dist is NOT far enough
    trace.append((jx + min_dist, jy))
    # and one clearly beyond it
    trace.append((jx + min_dist + 3.0, jy))

    vertices: list = []
    for sample in trace:
        vertices = freehand_add(vertices, sample, min_dist)
    return {
        "min_dist": min_dist,
        "trace": [[x, y] for x, y in trace],
        "expected": [[x, y] for x, y in vertices],
    }


def bezier_commit_fixture() -> dict:
    # the exact wire the curve tool emits for a three-unit closed
    # outline: clicks at (4,26), (44,26), (24,4), then back onto the
    # start; control points default to chord midpoints, two of them
    # then dragged upward
    wire = [
        {"kind": "bezier", "a": [4.0, 26.0], "g": [24.0, 26.0], "b": [44.0, 26.0]},
        {"kind": "bezier", "a": [44.0, 26.0], "g": [40.0, -10.0], "b": [24.0, 4.0]},
        {"kind": "bezier", "a": [24.0, 4.0], "g": [8.0, -10.0], "b": [4.0, 26.0]},
    ]
    tolerance = 0.5
    width, height = 48, 30
    polygon = flatten_path(path_from_wire(wire), tolerance)
    mask = fill_polygon(polygon, width, height)
    return {
        "wire": wire,
        "tolerance": tolerance,
        "width": width,
        "height": height,
        "expected_popcount": int(mask.sum()),
        "expected_vertex_count": len(polygon),
    }


def annotate_script_fixture() -> dict:
    rng = np.random.default_rng(3131)
    min_dist = 5.0
    trace: list[tuple[float, float]] = []
    for i in range(300):
        t = 2.0 * np.pi * i / 300.0
        r = 64.0 + 14.0 * np.sin(2.0 * t + 0.8)
        x = 160.0 + r * np.cos(t) + float(rng.uniform(-0.6, 0.6))
        y = 120.0 + r * np.sin(t) + float(rng.uniform(-0.6, 0.6))
        trace.append((x, y))
    vertices: list = []
    for sample in trace:
        vertices = freehand_add(vertices, sample, min_dist)
    return {
        "source": "synthetic:41",
        "labels": [
            {"name": "spore", "color": [0, 255, 0]},
            {"name": "film", "color": [255, 8, 8]},
        ],
        "freehand": {"label": "spore", "trace": [[x, y] for x, y in trace],
                     "min_dist": min_dist},
        "threshold": {"label": "film", "value": 120,
                      "polarity": "dark-foreground"},
        "instances": True,
        "expected_vertices": [[x, y] for x, y in vertices],
    }


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    out = {
        "blend_cases.json": blend_cases(),
        "freehand_trace.json": freehand_fixture(),
        "bezier_commit.json": bezier_commit_fixture(),
        "annotate_script.json": annotate_script_fixture(),
    }
    for name, payload in out.items():
        path = FIXTURES / name
        path.write_text(json.dumps(payload) + "\n", encoding="utf-8")
        print(f"wrote {path} ({path.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
