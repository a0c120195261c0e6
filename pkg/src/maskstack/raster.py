"""Binary mask rasterization and algebra.

A mask is a boolean numpy array of shape ``(height, width)``; pixel
``(x, y)`` lives at ``mask[y, x]``. :func:`fill_polygon` marks a pixel
exactly when its center ``(x + 0.5, y + 0.5)`` is inside the polygon
under the even-odd rule. Ties are broken half-open: an edge spans the
scanline on ``min(y) <= yc < max(y)`` and a crossing counts only when it
lies strictly right of the pixel center, so shapes sharing a border
never double-fill and a center sitting exactly on a right/bottom edge is
outside. Horizontal edges never cross a scanline. No anti-aliasing
anywhere: downstream label encoding is exact-color.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

from .errors import DegeneratePolygonError, DimensionMismatch

Mask = NDArray[np.bool_]


def new_mask(width: int, height: int) -> Mask:
    if width <= 0 or height <= 0:
        raise ValueError(f"mask dimensions must be positive, got {width}x{height}")
    return np.zeros((height, width), dtype=bool)


def _check_same_shape(a: Mask, b: Mask) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")


def fill_polygon(polygon, width: int, height: int) -> Mask:
    """Rasterize a closed polyline (first vertex not repeated) to a mask.

    Vertices may lie outside the frame; the pixel grid clips implicitly.
    Self-intersecting input is legal and fills by even-odd parity.
    """
    if width <= 0 or height <= 0:
        raise ValueError(f"frame dimensions must be positive, got {width}x{height}")
    verts = np.asarray(polygon, dtype=np.float64)
    if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
        raise DegeneratePolygonError(
            f"polygon needs at least 3 (x, y) vertices, got shape {verts.shape}"
        )
    if not np.isfinite(verts).all():
        raise ValueError("polygon vertices must be finite")

    mask = np.zeros((height, width), dtype=bool)
    x1 = verts[:, 0]
    y1 = verts[:, 1]
    x2 = np.roll(x1, -1)
    y2 = np.roll(y1, -1)

    y_first = max(0, int(math.floor(verts[:, 1].min() - 0.5)))
    y_last = min(height - 1, int(math.ceil(verts[:, 1].max())))
    for y in range(y_first, y_last + 1):
        yc = y + 0.5
        crossing = ((y1 <= yc) & (yc < y2)) | ((y2 <= yc) & (yc < y1))
        if not crossing.any():
            continue
        xs = x1[crossing] + (yc - y1[crossing]) * (x2[crossing] - x1[crossing]) / (
            y2[crossing] - y1[crossing]
        )
        xs.sort()
        # even count by parity of the closed curve; fill [lo, hi) around centers
        for lo, hi in xs.reshape(-1, 2):
            left = max(0, int(math.ceil(lo - 0.5)))
            right = min(width, int(math.ceil(hi - 0.5)))
            if left < right:
                mask[y, left:right] = True
    return mask


def mask_union(a: Mask, b: Mask) -> Mask:
    _check_same_shape(a, b)
    return a | b


def mask_subtract(a: Mask, b: Mask) -> Mask:
    _check_same_shape(a, b)
    return a & ~b


def mask_bbox(mask: Mask) -> tuple[int, int, int, int] | None:
    """Tightest ``(x, y, width, height)`` around set pixels, or None."""
    rows = np.flatnonzero(mask.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(mask.any(axis=0))
    x0, x1 = int(cols[0]), int(cols[-1])
    y0, y1 = int(rows[0]), int(rows[-1])
    return (x0, y0, x1 - x0 + 1, y1 - y0 + 1)
