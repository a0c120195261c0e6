"""Annotation category registry: names, RGB colors, contiguous indices.

A label's index is its position in the config's list, so indices are
always the contiguous range ``0..n-1`` and removing a label re-indexes
the remainder. Black ``(0, 0, 0)`` is reserved for the background and
maps to ``background_index == n``, one past the last label. Colors and
names are unique because downstream mask decoding works purely by color.

The on-disk form is a JSON object ``{"labels": [{"name": ..., "color":
[r, g, b]}, ...]}``; the index is implicit in list order and the
background is never serialized.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import (
    DuplicateColor,
    DuplicateName,
    EmptyName,
    ReservedColor,
    SchemaViolation,
    UnknownLabel,
)

RGB = tuple[int, int, int]

BACKGROUND_COLOR: RGB = (0, 0, 0)


def _check_color(color) -> RGB:
    """Validate and normalize an RGB triple."""
    try:
        r, g, b = color
    except (TypeError, ValueError):
        raise SchemaViolation(f"not an RGB triple: {color!r}") from None
    if any(isinstance(c, bool) for c in (r, g, b)):
        raise SchemaViolation(f"color channels must be integers 0-255: {color!r}")
    triple = (int(r), int(g), int(b))
    if triple != (r, g, b) or not all(0 <= c <= 255 for c in triple):
        raise SchemaViolation(f"color channels must be integers 0-255: {color!r}")
    if triple == BACKGROUND_COLOR:
        raise ReservedColor("(0, 0, 0) is reserved for the background")
    return triple


@dataclass(frozen=True)
class Label:
    name: str
    color: RGB
    index: int


@dataclass(frozen=True)
class LabelConfig:
    """Immutable ordered label registry.

    Mutation helpers (:func:`add_label`, :func:`remove_label`) return new
    configs, so instances are safe to share across threads.
    """

    labels: tuple[Label, ...] = ()

    def __post_init__(self):
        names: set[str] = set()
        colors: set[RGB] = set()
        for position, label in enumerate(self.labels):
            if not label.name:
                raise EmptyName("label name must be non-empty")
            if label.index != position:
                raise SchemaViolation(
                    f"label {label.name!r} has index {label.index}, expected {position}"
                )
            if label.name in names:
                raise DuplicateName(f"duplicate label name {label.name!r}")
            color = _check_color(label.color)
            if color in colors:
                raise DuplicateColor(f"duplicate label color {color}")
            names.add(label.name)
            colors.add(color)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    @property
    def background_index(self) -> int:
        return len(self.labels)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(label.name for label in self.labels)

    def get(self, name: str) -> Label:
        for label in self.labels:
            if label.name == name:
                return label
        raise UnknownLabel(f"no label named {name!r}")

    def __contains__(self, name: str) -> bool:
        return any(label.name == name for label in self.labels)

    def color_of(self, index: int) -> RGB:
        """Color for a label index; the background index maps to black."""
        if index == self.background_index:
            return BACKGROUND_COLOR
        if 0 <= index < len(self.labels):
            return self.labels[index].color
        raise UnknownLabel(f"no label with index {index}")

    def index_of(self, color: RGB) -> int:
        """Index for an exact color; black maps to the background index."""
        color = (int(color[0]), int(color[1]), int(color[2]))
        if color == BACKGROUND_COLOR:
            return self.background_index
        for label in self.labels:
            if label.color == color:
                return label.index
        raise UnknownLabel(f"no label with color {color}")


def add_label(cfg: LabelConfig, name: str, color) -> LabelConfig:
    """Return ``cfg`` plus a new label appended at index ``len(cfg)``."""
    if not name:
        raise EmptyName("label name must be non-empty")
    triple = _check_color(color)
    if name in cfg:
        raise DuplicateName(f"label {name!r} already exists")
    if any(label.color == triple for label in cfg.labels):
        raise DuplicateColor(f"color {triple} already assigned")
    return LabelConfig(cfg.labels + (Label(name, triple, len(cfg.labels)),))


def remove_label(cfg: LabelConfig, name: str) -> LabelConfig:
    """Return ``cfg`` without ``name``; remaining labels are re-indexed."""
    if name not in cfg:
        raise UnknownLabel(f"no label named {name!r}")
    kept = [label for label in cfg.labels if label.name != name]
    return LabelConfig(tuple(
        Label(label.name, label.color, index) for index, label in enumerate(kept)
    ))


def config_to_dict(cfg: LabelConfig) -> dict:
    return {
        "labels": [
            {"name": label.name, "color": list(label.color)} for label in cfg.labels
        ]
    }


def config_from_dict(data) -> LabelConfig:
    if not isinstance(data, dict) or not isinstance(data.get("labels"), list):
        raise SchemaViolation('expected an object with a "labels" list')
    labels = []
    for index, entry in enumerate(data["labels"]):
        if not isinstance(entry, dict) or "name" not in entry or "color" not in entry:
            raise SchemaViolation(f"label entry {index} must have name and color")
        name = entry["name"]
        if not isinstance(name, str):
            raise SchemaViolation(f"label entry {index} name must be a string")
        color = entry["color"]
        if not isinstance(color, (list, tuple)) or len(color) != 3 or not all(
            isinstance(c, int) and not isinstance(c, bool) for c in color
        ):
            raise SchemaViolation(f"label entry {index} color must be [r, g, b] integers")
        labels.append(Label(name, (color[0], color[1], color[2]), index))
    try:
        return LabelConfig(tuple(labels))
    except SchemaViolation:
        raise
    except (EmptyName, DuplicateName, DuplicateColor, ReservedColor) as exc:
        raise SchemaViolation(str(exc)) from exc


def save_config(cfg: LabelConfig, path) -> None:
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2)
        fh.write("\n")


def load_config(path) -> LabelConfig:
    with open(os.fspath(path), "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(data)
