"""Non-destructive annotation layers and their raster compositing.

Each layer is one annotation: a frozen binary mask plus the label it
carries, ordered bottom-to-top in a :class:`LayerStack`. Compositing
merges the stack into a single RGB color mask by painting layers in
order, so the topmost layer covering a pixel wins and uncovered pixels
stay black. Editing never touches neighboring layers: every operation
returns a new stack and layer masks are write-protected at construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, UnknownLayer
from .labels import LabelConfig
from .raster import Mask


class LayerSource(str, enum.Enum):
    PATH = "path"
    FREEHAND = "freehand"
    THRESHOLD = "threshold"


@dataclass(frozen=True)
class Layer:
    id: int
    label_name: str
    mask: Mask
    source: LayerSource = LayerSource.PATH

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool, copy=True)
        if mask.ndim != 2:
            raise ValueError(f"layer mask must be 2-D, got shape {mask.shape}")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "source", LayerSource(self.source))

    @property
    def empty(self) -> bool:
        return not self.mask.any()


@dataclass(frozen=True)
class LayerStack:
    """Ordered annotation layers; index 0 is the bottom."""

    frame_width: int
    frame_height: int
    layers: tuple[Layer, ...] = ()

    def __post_init__(self):
        if self.frame_width <= 0 or self.frame_height <= 0:
            raise ValueError("stack dimensions must be positive")
        seen: set[int] = set()
        for layer in self.layers:
            if layer.mask.shape != (self.frame_height, self.frame_width):
                raise DimensionMismatch(
                    f"layer {layer.id} mask {layer.mask.shape} does not match "
                    f"frame {(self.frame_height, self.frame_width)}"
                )
            if layer.id in seen:
                raise ValueError(f"duplicate layer id {layer.id}")
            seen.add(layer.id)

    def __len__(self) -> int:
        return len(self.layers)

    def __iter__(self):
        return iter(self.layers)

    def get(self, layer_id: int) -> Layer:
        for layer in self.layers:
            if layer.id == layer_id:
                return layer
        raise UnknownLayer(f"no layer with id {layer_id}")

    def index_of(self, layer_id: int) -> int:
        for position, layer in enumerate(self.layers):
            if layer.id == layer_id:
                return position
        raise UnknownLayer(f"no layer with id {layer_id}")


def push_layer(stack: LayerStack, layer: Layer) -> LayerStack:
    return LayerStack(stack.frame_width, stack.frame_height, stack.layers + (layer,))


def delete_layer(stack: LayerStack, layer_id: int) -> LayerStack:
    stack.get(layer_id)
    kept = tuple(layer for layer in stack.layers if layer.id != layer_id)
    return LayerStack(stack.frame_width, stack.frame_height, kept)


def reorder_layer(stack: LayerStack, layer_id: int, new_index: int) -> LayerStack:
    """Move a layer to ``new_index`` (0 = bottom), shifting the rest."""
    position = stack.index_of(layer_id)
    if not 0 <= new_index < len(stack.layers):
        raise ValueError(f"new_index {new_index} outside 0..{len(stack.layers) - 1}")
    layers = list(stack.layers)
    layer = layers.pop(position)
    layers.insert(new_index, layer)
    return LayerStack(stack.frame_width, stack.frame_height, tuple(layers))


def replace_mask(stack: LayerStack, layer_id: int, mask: Mask) -> LayerStack:
    """Swap in an edited mask, keeping the layer's id, label, and position.

    This is the eraser/refine primitive: compute the new mask with
    :func:`maskstack.raster.mask_subtract` or friends, then replace.
    """
    position = stack.index_of(layer_id)
    old = stack.layers[position]
    layers = list(stack.layers)
    layers[position] = Layer(old.id, old.label_name, mask, old.source)
    return LayerStack(stack.frame_width, stack.frame_height, tuple(layers))


def composite(stack: LayerStack, cfg: LabelConfig) -> np.ndarray:
    """Merge bottom-to-top into one RGB color mask; top color wins.

    Pixels no layer covers stay black (the background).
    """
    out = np.zeros((stack.frame_height, stack.frame_width, 3), dtype=np.uint8)
    for layer in stack.layers:
        color = cfg.get(layer.label_name).color
        out[layer.mask] = color
    return out


def blend_preview(frame: np.ndarray, cmask: np.ndarray, opacity: float) -> np.ndarray:
    """Overlay a color mask on a frame for display.

    Covered (non-black) pixels become ``round(opacity * mask_color +
    (1 - opacity) * frame)`` with round-half-up; background pixels pass
    through untouched.
    """
    if not 0.0 <= opacity <= 1.0:
        raise ValueError(f"opacity must be in [0, 1], got {opacity}")
    frame = np.asarray(frame)
    cmask = np.asarray(cmask)
    if frame.shape != cmask.shape:
        raise DimensionMismatch(f"frame {frame.shape} vs mask {cmask.shape}")
    covered = cmask.any(axis=2)
    out = frame.copy()
    mixed = opacity * cmask[covered].astype(np.float64) + (1.0 - opacity) * frame[
        covered
    ].astype(np.float64)
    out[covered] = np.floor(mixed + 0.5).astype(np.uint8)
    return out


def export_instances(stack: LayerStack, cfg: LabelConfig) -> list[tuple[str, Mask]]:
    """Per-layer (label, mask) pairs, bottom-to-top, un-occluded.

    Each mask is the layer's own verbatim mask; the occlusion-resolved
    view is exactly :func:`composite`.
    """
    for layer in stack.layers:
        cfg.get(layer.label_name)
    return [(layer.label_name, layer.mask) for layer in stack.layers]
