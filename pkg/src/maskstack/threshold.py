"""Global intensity thresholding: the semi-automated mask path.

Intensity is Rec. 601 luma, rounded half-up to an integer:
``I = round(0.299 R + 0.587 G + 0.114 B)``. Dark-foreground selects
``I < threshold`` (objects against a bright field), bright-foreground
selects ``I >= threshold``; the two are exact complements at the same
threshold.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DimensionMismatch
from .raster import Mask


class Polarity(str, enum.Enum):
    DARK_FOREGROUND = "dark-foreground"
    BRIGHT_FOREGROUND = "bright-foreground"


def _as_polarity(polarity) -> Polarity:
    if isinstance(polarity, Polarity):
        return polarity
    return Polarity(polarity)


def luma(pixels: np.ndarray) -> np.ndarray:
    """Per-pixel integer intensity 0-255 (Rec. 601, round half up)."""
    rgb = np.asarray(pixels)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB pixels, got shape {rgb.shape}")
    weighted = (
        0.299 * rgb[:, :, 0].astype(np.float64)
        + 0.587 * rgb[:, :, 1].astype(np.float64)
        + 0.114 * rgb[:, :, 2].astype(np.float64)
    )
    return np.floor(weighted + 0.5).astype(np.uint8)


def threshold_mask(pixels: np.ndarray, threshold: int, polarity) -> Mask:
    """Binary mask of pixels darker (or brighter) than ``threshold``."""
    if not 0 <= int(threshold) <= 255:
        raise ValueError(f"threshold must be in 0..255, got {threshold}")
    intensity = luma(pixels)
    if _as_polarity(polarity) is Polarity.DARK_FOREGROUND:
        return intensity < int(threshold)
    return intensity >= int(threshold)


def threshold_within(pixels: np.ndarray, region: Mask, threshold: int, polarity) -> Mask:
    """Threshold confined to a drawn region: ``threshold_mask & region``."""
    region = np.asarray(region, dtype=bool)
    if region.shape != np.asarray(pixels).shape[:2]:
        raise DimensionMismatch(
            f"region shape {region.shape} does not match frame {np.asarray(pixels).shape[:2]}"
        )
    return threshold_mask(pixels, threshold, polarity) & region
