"""Headless pixel-annotation engine.

Draw closed outlines from line and quadratic curve segments (or
freehand traces), rasterize them into boolean masks, cut foregrounds by
luma threshold, stack the results into non-destructive layers, and
export color-coded segmentation datasets. A seeded compositor grows
small annotation libraries into large synthetic datasets, and a local
HTTP service exposes the whole loop for interactive frontends.
"""

from __future__ import annotations

from . import errors
from .dataset import (
    DatasetRoot,
    color_to_index,
    index_to_color,
    validate_dataset,
)
from .engineer import (
    Cutout,
    EngineerSpec,
    Transform,
    apply_transform,
    compose_one,
    extract_cutout,
    generate_composites,
    load_cutout,
    pair_rng,
    paste_cutout,
    save_cutout,
)
from .geometry import (
    AnnotationPath,
    BezierUnit,
    LineSegment,
    close_polyline,
    eval_bezier,
    flatten_path,
    freehand_add,
    path_from_wire,
    path_to_wire,
)
from .labels import (
    BACKGROUND_COLOR,
    Label,
    LabelConfig,
    add_label,
    config_from_dict,
    config_to_dict,
    load_config,
    remove_label,
    save_config,
)
from .layers import (
    Layer,
    LayerSource,
    LayerStack,
    blend_preview,
    composite,
    delete_layer,
    export_instances,
    push_layer,
    reorder_layer,
    replace_mask,
)
from .mjpeg import MjpegClient, MultipartParser, decode_jpeg, parse_boundary
from .raster import fill_polygon, mask_bbox, mask_subtract, mask_union, new_mask
from .service import AnnotationSession, make_server
from .sources import (
    MAX_DEVICES,
    DirectorySource,
    Frame,
    FrameSource,
    MjpegSource,
    SourceRegistry,
    SyntheticSource,
    enumerate_sources,
    open_source,
)
from .threshold import Polarity, luma, threshold_mask, threshold_within

__version__ = "1.0.0"

__all__ = [
    "AnnotationPath",
    "AnnotationSession",
    "BACKGROUND_COLOR",
    "BezierUnit",
    "Cutout",
    "DatasetRoot",
    "DirectorySource",
    "EngineerSpec",
    "Frame",
    "FrameSource",
    "Label",
    "LabelConfig",
    "Layer",
    "LayerSource",
    "LayerStack",
    "LineSegment",
    "MAX_DEVICES",
    "MjpegClient",
    "MjpegSource",
    "MultipartParser",
    "Polarity",
    "SourceRegistry",
    "SyntheticSource",
    "Transform",
    "add_label",
    "apply_transform",
    "blend_preview",
    "close_polyline",
    "color_to_index",
    "compose_one",
    "composite",
    "config_from_dict",
    "config_to_dict",
    "decode_jpeg",
    "delete_layer",
    "enumerate_sources",
    "errors",
    "eval_bezier",
    "export_instances",
    "extract_cutout",
    "fill_polygon",
    "flatten_path",
    "freehand_add",
    "generate_composites",
    "index_to_color",
    "load_config",
    "load_cutout",
    "luma",
    "make_server",
    "mask_bbox",
    "mask_subtract",
    "mask_union",
    "new_mask",
    "open_source",
    "pair_rng",
    "paste_cutout",
    "path_from_wire",
    "path_to_wire",
    "push_layer",
    "remove_label",
    "reorder_layer",
    "replace_mask",
    "save_config",
    "save_cutout",
    "threshold_mask",
    "threshold_within",
    "validate_dataset",
]
