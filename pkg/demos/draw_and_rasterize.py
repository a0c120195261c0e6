#!/usr/bin/env python3
"""Trace a closed outline with lines and a curve, then rasterize it.

Shows the geometry half of the engine end to end: a quadratic curve
unit is flattened into a polyline at a few tolerances, the closed
outline becomes a pixel mask via scanline even-odd filling, and the
result is printed as ASCII art plus saved as a PNG.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from maskstack import (
    AnnotationPath,
    BezierUnit,
    LineSegment,
    fill_polygon,
    flatten_path,
    mask_bbox,
)

OUT = Path(__file__).parent / "out"


def ascii_mask(mask: np.ndarray) -> str:
    return "\n".join(
        "".join("#" if cell else "." for cell in row) for row in mask
    )


def main() -> None:
    # a leaf shape: flat base, curved top edge pulled up by the control point
    path = AnnotationPath((
        LineSegment((4, 26), (44, 26)),
        BezierUnit((44, 26), (40, -10), (24, 4)),
        BezierUnit((24, 4), (8, -10), (4, 26)),
    ))

    for tol in (2.0, 0.5, 0.1):
        polygon = flatten_path(path, tol)
        print(f"tolerance {tol:>4}: {len(polygon):3d} vertices")

    polygon = flatten_path(path, 0.25)
    mask = fill_polygon(polygon, 48, 30)
    print(f"\nfilled {int(mask.sum())} of {mask.size} pixels, bbox {mask_bbox(mask)}")
    print(ascii_mask(mask))

    OUT.mkdir(exist_ok=True)
    Image.fromarray(mask.astype(np.uint8) * 255, mode="L").save(OUT / "leaf_mask.png")
    print(f"\nwrote {OUT / 'leaf_mask.png'}")


if __name__ == "__main__":
    main()
