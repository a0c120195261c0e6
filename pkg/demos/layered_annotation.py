#!/usr/bin/env python3
"""Annotate one synthetic frame with a threshold layer and a drawn layer.

Walks the non-destructive layer workflow: grab a frame, auto-select the
dark disk with a luma threshold, hand-draw a polygon over the red disk,
erase a notch, then composite the stack into a color mask and write a
half-transparent overlay PNG for eyeballing.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from maskstack import (
    LabelConfig,
    Layer,
    LayerSource,
    LayerStack,
    SyntheticSource,
    add_label,
    blend_preview,
    composite,
    delete_layer,
    fill_polygon,
    mask_subtract,
    push_layer,
    replace_mask,
    threshold_within,
)

OUT = Path(__file__).parent / "out"


def main() -> None:
    cfg = LabelConfig()
    cfg = add_label(cfg, "dark_disk", (0, 255, 0))
    cfg = add_label(cfg, "red_disk", (255, 8, 8))

    frame = SyntheticSource(160, 120, seed=7).next_frame()
    pixels = frame.pixels

    stack = LayerStack(frame.width, frame.height)

    # layer 1: the dark orbiting disk, found photometrically inside a
    # hand-drawn box (a bare threshold would also catch the dark end of
    # the background ramp); the box position fits this seeded frame
    region = fill_polygon(
        [(96, 44), (136, 44), (136, 83), (96, 83)],
        frame.width, frame.height,
    )
    dark = threshold_within(pixels, region, 60, "dark-foreground")
    stack = push_layer(stack, Layer(1, "dark_disk", dark, LayerSource.THRESHOLD))

    # layer 2: a rough hand-drawn polygon around the red disk
    red = np.argwhere((pixels[:, :, 0] > 180) & (pixels[:, :, 1] < 90))
    cy, cx = red.mean(axis=0)
    r = 18.0
    hexagon = [
        (cx + r * np.cos(a), cy + r * np.sin(a))
        for a in np.linspace(0.0, 2.0 * np.pi, 6, endpoint=False)
    ]
    drawn = fill_polygon(hexagon, frame.width, frame.height)
    stack = push_layer(stack, Layer(2, "red_disk", drawn, LayerSource.FREEHAND))

    # carve a notch out of the drawn layer without touching the other one
    notch = fill_polygon(
        [(cx, cy), (cx + 30, cy - 12), (cx + 30, cy + 12)],
        frame.width, frame.height,
    )
    stack = replace_mask(stack, 2, mask_subtract(stack.get(2).mask, notch))

    for layer in stack:
        print(f"layer {layer.id}: {layer.label_name:10s} "
              f"{layer.source.value:10s} {int(layer.mask.sum()):5d} px")

    cmask = composite(stack, cfg)
    overlay = blend_preview(pixels, cmask, 0.45)

    OUT.mkdir(exist_ok=True)
    Image.fromarray(pixels).save(OUT / "frame.png")
    Image.fromarray(cmask).save(OUT / "color_mask.png")
    Image.fromarray(overlay).save(OUT / "overlay.png")
    print(f"wrote frame/color_mask/overlay under {OUT}")

    # layers stay independent: dropping the threshold layer leaves the polygon
    without_dark = delete_layer(stack, 1)
    remaining = composite(without_dark, cfg)
    assert (remaining == (0, 255, 0)).all(axis=2).sum() == 0
    print("deleted layer 1; composite now has no dark_disk pixels")


if __name__ == "__main__":
    main()
