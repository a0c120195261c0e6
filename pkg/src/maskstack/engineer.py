"""Synthetic dataset engineering: cutout extraction and seeded compositing.

A small library of annotated objects is expanded into an arbitrarily
large segmentation dataset. Each source mask isolates its object's
pixels into a trimmed RGBA :class:`Cutout` (background fully
transparent). Composites then stack randomly chosen, randomly
transformed cutouts onto a background: the identical transform is
applied to a cutout's pixels and to its opaque support, so image and
mask stay aligned pixel for pixel, and later pastes overwrite earlier
ones exactly like layer compositing (top color wins).

Transforms are restricted to horizontal/vertical flips and right-angle
rotations; all are exact pixel permutations, so masks keep exact label
colors and cutout pixel counts are invariant.

Randomness is a counter-based Philox stream keyed by ``(seed, pair
index)``: every pair has an independent substream, generation order is
irrelevant, and identical spec+seed reproduces identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .dataset import DatasetRoot
from .errors import DimensionMismatch, EmptyLibrary, EmptyMask, SchemaViolation
from .labels import LabelConfig
from .raster import Mask, mask_bbox

RIGHT_ANGLES = (0, 90, 180, 270)


@dataclass(frozen=True)
class Cutout:
    """Trimmed RGBA object crop; alpha 255 on the object, 0 elsewhere."""

    rgba: np.ndarray
    label_name: str

    def __post_init__(self):
        rgba = np.array(self.rgba, dtype=np.uint8, copy=True)
        if rgba.ndim != 3 or rgba.shape[2] != 4:
            raise ValueError(f"cutout must be (h, w, 4) RGBA, got {rgba.shape}")
        if not (rgba[:, :, 3] > 0).any():
            raise EmptyMask("cutout has no opaque pixels")
        rgba.setflags(write=False)
        object.__setattr__(self, "rgba", rgba)

    @property
    def width(self) -> int:
        return self.rgba.shape[1]

    @property
    def height(self) -> int:
        return self.rgba.shape[0]

    @property
    def mask(self) -> Mask:
        return self.rgba[:, :, 3] > 0


def extract_cutout(frame: np.ndarray, mask: Mask, label_name: str) -> Cutout:
    """Isolate the masked object from a frame as a bbox-tight RGBA crop."""
    frame = np.asarray(frame, dtype=np.uint8)
    mask = np.asarray(mask, dtype=bool)
    if frame.shape[:2] != mask.shape:
        raise DimensionMismatch(f"frame {frame.shape[:2]} vs mask {mask.shape}")
    bbox = mask_bbox(mask)
    if bbox is None:
        raise EmptyMask("cannot extract a cutout from an empty mask")
    x, y, w, h = bbox
    crop = frame[y : y + h, x : x + w]
    support = mask[y : y + h, x : x + w]
    rgba = np.zeros((h, w, 4), dtype=np.uint8)
    rgba[support, :3] = crop[support]
    rgba[support, 3] = 255
    return Cutout(rgba, label_name)


def save_cutout(cutout: Cutout, path) -> None:
    Image.fromarray(cutout.rgba, mode="RGBA").save(path, format="PNG")


def load_cutout(path, label_name: str) -> Cutout:
    with Image.open(path) as img:
        rgba = np.asarray(img.convert("RGBA"), dtype=np.uint8)
    return Cutout(rgba, label_name)


@dataclass(frozen=True)
class Transform:
    """Flips then a counter-clockwise right-angle rotation, in that order."""

    hflip: bool = False
    vflip: bool = False
    rotate: int = 0

    def __post_init__(self):
        if self.rotate not in RIGHT_ANGLES:
            raise ValueError(f"rotate must be one of {RIGHT_ANGLES}, got {self.rotate}")

    def to_dict(self) -> dict:
        return {"hflip": self.hflip, "vflip": self.vflip, "rotate": self.rotate}

    @classmethod
    def from_dict(cls, data: dict) -> "Transform":
        return cls(bool(data["hflip"]), bool(data["vflip"]), int(data["rotate"]))


def apply_transform(array: np.ndarray, transform: Transform) -> np.ndarray:
    """Apply a transform to any (h, w[, c]) array as a pure pixel permutation."""
    out = np.asarray(array)
    if transform.hflip:
        out = out[:, ::-1]
    if transform.vflip:
        out = out[::-1, :]
    if transform.rotate:
        out = np.rot90(out, k=transform.rotate // 90)
    return np.ascontiguousarray(out)


@dataclass(frozen=True)
class EngineerSpec:
    """Everything a composite run needs; hashable to a stable digest."""

    config: LabelConfig
    cutouts: dict[str, tuple[Cutout, ...]]
    backgrounds: tuple[np.ndarray, ...]
    width: int
    height: int
    count: int
    seed: int
    max_classes: int
    instances_per_class: tuple[int, int] = (1, 3)
    allow_hflip: bool = True
    allow_vflip: bool = True
    rotations: tuple[int, ...] = RIGHT_ANGLES

    def __post_init__(self):
        if self.count <= 0:
            raise SchemaViolation(f"count must be positive, got {self.count}")
        if self.width <= 0 or self.height <= 0:
            raise SchemaViolation("output dimensions must be positive")
        if not 0 <= self.seed < 2**64:
            raise SchemaViolation("seed must fit in 64 bits")
        if self.max_classes < 0:
            raise SchemaViolation("max_classes must be >= 0")
        if not self.backgrounds:
            raise SchemaViolation("at least one background image is required")
        lo, hi = self.instances_per_class
        if not 1 <= lo <= hi:
            raise SchemaViolation(
                f"instances_per_class must satisfy 1 <= lo <= hi, got {lo}..{hi}"
            )
        if not self.rotations or any(r not in RIGHT_ANGLES for r in self.rotations):
            raise SchemaViolation(f"rotations must be a non-empty subset of {RIGHT_ANGLES}")
        for label_name, library in self.cutouts.items():
            self.config.get(label_name)
            for cutout in library:
                if cutout.label_name != label_name:
                    raise SchemaViolation(
                        f"cutout labeled {cutout.label_name!r} filed under {label_name!r}"
                    )
        backgrounds = []
        for bg in self.backgrounds:
            bg = np.array(bg, dtype=np.uint8, copy=True)
            if bg.shape != (self.height, self.width, 3):
                raise SchemaViolation(
                    f"background shape {bg.shape} must be "
                    f"{(self.height, self.width, 3)}"
                )
            bg.setflags(write=False)
            backgrounds.append(bg)
        object.__setattr__(self, "backgrounds", tuple(backgrounds))

    def label_order(self) -> list[str]:
        """Library labels in config-index order: the canonical shuffle base."""
        return sorted(self.cutouts, key=lambda name: self.config.get(name).index)

    def digest(self) -> str:
        """sha256 over every input that influences generated bytes."""
        h = hashlib.sha256()

        def put(tag: str, payload: bytes) -> None:
            h.update(tag.encode())
            h.update(len(payload).to_bytes(8, "big"))
            h.update(payload)

        put("config", json.dumps(
            [[label.name, list(label.color)] for label in self.config]
        ).encode())
        for name in self.label_order():
            for cutout in self.cutouts[name]:
                put(f"cutout:{name}", cutout.rgba.tobytes())
        for bg in self.backgrounds:
            put("background", bg.tobytes())
        put("params", json.dumps({
            "width": self.width,
            "height": self.height,
            "count": self.count,
            "seed": self.seed,
            "max_classes": self.max_classes,
            "instances_per_class": list(self.instances_per_class),
            "allow_hflip": self.allow_hflip,
            "allow_vflip": self.allow_vflip,
            "rotations": list(self.rotations),
        }, sort_keys=True).encode())
        return h.hexdigest()


def pair_rng(seed: int, pair_index: int) -> np.random.Generator:
    """Independent substream for one pair, keyed by (seed, index)."""
    key = np.array([seed, pair_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def paste_cutout(
    image: np.ndarray,
    cmask: np.ndarray,
    rgba: np.ndarray,
    color: tuple[int, int, int],
    x: int,
    y: int,
) -> None:
    """Paste in place at bbox top-left (x, y); off-frame parts clip away.

    Opaque cutout pixels overwrite the image and paint the label color
    into the mask; transparent pixels leave both untouched.
    """
    frame_h, frame_w = image.shape[:2]
    h, w = rgba.shape[:2]
    sx0, sy0 = max(0, -x), max(0, -y)
    sx1, sy1 = min(w, frame_w - x), min(h, frame_h - y)
    if sx0 >= sx1 or sy0 >= sy1:
        return
    sub = rgba[sy0:sy1, sx0:sx1]
    opaque = sub[:, :, 3] > 0
    view_img = image[y + sy0 : y + sy1, x + sx0 : x + sx1]
    view_msk = cmask[y + sy0 : y + sy1, x + sx0 : x + sx1]
    view_img[opaque] = sub[:, :, :3][opaque]
    view_msk[opaque] = color


def compose_one(
    spec: EngineerSpec,
    pair_index: int,
    place=None,
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Build one composite image/mask pair plus its provenance record.

    Draw order, all from the pair's own RNG substream: background; label
    order shuffled; class count k uniform on 1..max_classes (0 when
    max_classes is 0); per class an instance count from the configured
    range; per instance a cutout (with replacement), a transform, and a
    paste position whose post-transform bbox always intersects the
    frame. ``place`` overrides position sampling for tests:
    ``place(label_name, tw, th) -> (x, y)``.
    """
    rng = pair_rng(spec.seed, pair_index)
    bg_index = int(rng.integers(len(spec.backgrounds)))
    image = spec.backgrounds[bg_index].copy()
    cmask = np.zeros((spec.height, spec.width, 3), dtype=np.uint8)

    labels = spec.label_order()
    order = rng.permutation(len(labels))
    if spec.max_classes == 0 or not labels:
        k = 0
    else:
        k = min(int(rng.integers(1, spec.max_classes + 1)), len(labels))
    chosen = [labels[i] for i in order[:k]]

    lo, hi = spec.instances_per_class
    instances = []
    for label_name in chosen:
        library = spec.cutouts.get(label_name, ())
        color = spec.config.get(label_name).color
        for _ in range(int(rng.integers(lo, hi + 1))):
            if not library:
                raise EmptyLibrary(f"no cutouts for label {label_name!r}")
            cutout_index = int(rng.integers(len(library)))
            transform = Transform(
                hflip=spec.allow_hflip and bool(rng.integers(2)),
                vflip=spec.allow_vflip and bool(rng.integers(2)),
                rotate=int(spec.rotations[rng.integers(len(spec.rotations))]),
            )
            rgba = apply_transform(spec.cutouts[label_name][cutout_index].rgba, transform)
            th, tw = rgba.shape[:2]
            if place is not None:
                x, y = place(label_name, tw, th)
            else:
                x = int(rng.integers(-tw + 1, spec.width))
                y = int(rng.integers(-th + 1, spec.height))
            paste_cutout(image, cmask, rgba, color, x, y)
            instances.append({
                "label": label_name,
                "cutout": cutout_index,
                "transform": transform.to_dict(),
                "position": [x, y],
            })
    provenance = {"background": bg_index, "instances": instances}
    return image, cmask, provenance


def generate_composites(spec: EngineerSpec, out_dir) -> tuple[DatasetRoot, Path]:
    """Write ``spec.count`` pairs plus manifest.json; fully deterministic.

    The manifest records the seed, the spec digest, and per-pair
    provenance (background, instances, transforms, positions), enough to
    replay any pasted region exactly.
    """
    ds = DatasetRoot.create(out_dir, spec.config)
    pairs = []
    for index in range(spec.count):
        name = f"{index:06d}"
        image, cmask, provenance = compose_one(spec, index)
        ds.save_pair(name, image, cmask)
        pairs.append({"name": name, **provenance})
    manifest = {
        "seed": spec.seed,
        "spec_hash": spec.digest(),
        "width": spec.width,
        "height": spec.height,
        "pairs": pairs,
    }
    manifest_path = ds.root / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ds, manifest_path


def load_spec(path, count: int, seed: int) -> EngineerSpec:
    """Read an engineer.json spec file; count and seed come from the caller.

    Schema::

        {
          "config": "config.json",
          "backgrounds": ["bg0.png", ...],
          "cutouts": {"label": ["cut0.png", ...], ...},
          "width": 128, "height": 128,
          "max_classes": 3,
          "instances_per_class": [1, 3],
          "transforms": {"hflip": true, "vflip": true,
                         "rotations": [0, 90, 180, 270]}
        }

    Relative paths resolve against the spec file's directory. Cutout
    files are RGBA PNGs whose alpha marks the object; backgrounds are
    resized-to-fit RGB images (must already match width/height).
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise SchemaViolation(f"{path}: expected a JSON object")

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else path.parent / p

    required = ["config", "backgrounds", "cutouts", "width", "height", "max_classes"]
    for key in required:
        if key not in data:
            raise SchemaViolation(f"{path}: missing required key {key!r}")

    from .labels import load_config

    config = load_config(resolve(data["config"]))
    if not isinstance(data["cutouts"], dict):
        raise SchemaViolation(f'{path}: "cutouts" must map label -> [paths]')
    cutouts: dict[str, tuple[Cutout, ...]] = {}
    for label_name, entries in data["cutouts"].items():
        if label_name not in config:
            raise SchemaViolation(f"{path}: unknown cutout label {label_name!r}")
        cutouts[label_name] = tuple(
            load_cutout(resolve(entry), label_name) for entry in entries
        )
    backgrounds = []
    for entry in data["backgrounds"]:
        with Image.open(resolve(entry)) as img:
            backgrounds.append(np.asarray(img.convert("RGB"), dtype=np.uint8))

    transforms = data.get("transforms", {})
    return EngineerSpec(
        config=config,
        cutouts=cutouts,
        backgrounds=tuple(backgrounds),
        width=int(data["width"]),
        height=int(data["height"]),
        count=count,
        seed=seed,
        max_classes=int(data["max_classes"]),
        instances_per_class=tuple(data.get("instances_per_class", (1, 3))),
        allow_hflip=bool(transforms.get("hflip", True)),
        allow_vflip=bool(transforms.get("vflip", True)),
        rotations=tuple(transforms.get("rotations", RIGHT_ANGLES)),
    )
