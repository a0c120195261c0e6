"""Dataset persistence: paired image/mask PNGs plus the label config.

Layout of a dataset root::

    root/
      config.json          label registry (see maskstack.labels)
      images/NAME.png      RGB frame, 8-bit
      masks/NAME.png       RGB color mask, 8-bit, lossless
      instances/NAME/      optional per-layer masks, <k>_<label>.png

Names are zero-padded monotonically increasing stems assigned by
:meth:`DatasetRoot.next_name`. Masks are stored as plain RGB color
images; converting colors to integer class indices is an explicit
training-prep step (:func:`color_to_index`), with black mapping to the
background index (one past the last label).
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    DimensionMismatch,
    DuplicateName,
    MissingImage,
    MissingMask,
    UnknownLabel,
    UnknownMaskColor,
)
from .labels import LabelConfig, load_config, save_config
from .raster import Mask

_NAME_RE = re.compile(r"^[\w.-]+$")

#: zero-padded width for allocated pair names
NAME_WIDTH = 6


def _encode_colors(cmask: np.ndarray) -> np.ndarray:
    """Pack (H, W, 3) uint8 colors into (H, W) int32 codes r<<16|g<<8|b."""
    c = cmask.astype(np.int32)
    return (c[:, :, 0] << 16) | (c[:, :, 1] << 8) | c[:, :, 2]


def _check_mask_colors(cmask: np.ndarray, cfg: LabelConfig, context: str) -> None:
    known = {0} | {
        (label.color[0] << 16) | (label.color[1] << 8) | label.color[2]
        for label in cfg
    }
    for code in np.unique(_encode_colors(cmask)):
        if int(code) not in known:
            rgb = ((code >> 16) & 0xFF, (code >> 8) & 0xFF, code & 0xFF)
            raise UnknownMaskColor(f"{context}: color {rgb} not in label config")


def color_to_index(cmask: np.ndarray, cfg: LabelConfig) -> np.ndarray:
    """Replace each mask color with its label index; black becomes the
    background index."""
    cmask = np.asarray(cmask, dtype=np.uint8)
    table = {0: cfg.background_index}
    for label in cfg:
        table[(label.color[0] << 16) | (label.color[1] << 8) | label.color[2]] = label.index
    encoded = _encode_colors(cmask)
    dtype = np.uint8 if cfg.background_index <= 255 else np.int32
    out = np.empty(encoded.shape, dtype=dtype)
    for code in np.unique(encoded):
        index = table.get(int(code))
        if index is None:
            rgb = ((code >> 16) & 0xFF, (code >> 8) & 0xFF, code & 0xFF)
            raise UnknownMaskColor(f"color {rgb} not in label config")
        out[encoded == code] = index
    return out


def index_to_color(imask: np.ndarray, cfg: LabelConfig) -> np.ndarray:
    """Inverse of :func:`color_to_index`; the background index maps to black."""
    imask = np.asarray(imask)
    out = np.zeros(imask.shape + (3,), dtype=np.uint8)
    for value in np.unique(imask):
        value = int(value)
        if value == cfg.background_index:
            continue
        if not 0 <= value < cfg.background_index:
            raise UnknownLabel(f"index {value} outside 0..{cfg.background_index}")
        out[imask == value] = cfg.labels[value].color
    return out


def _read_png_rgb(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def _write_png_rgb(path: Path, pixels: np.ndarray) -> None:
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    Image.fromarray(arr, mode="RGB").save(path, format="PNG")


class DatasetRoot:
    """One annotation dataset directory and its label config."""

    def __init__(self, root, cfg: LabelConfig):
        self.root = Path(root)
        self.cfg = cfg

    # -- construction ----------------------------------------------------

    @classmethod
    def create(cls, root, cfg: LabelConfig | None = None) -> "DatasetRoot":
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        ds = cls(root, cfg if cfg is not None else LabelConfig())
        ds.images_dir.mkdir(exist_ok=True)
        ds.masks_dir.mkdir(exist_ok=True)
        save_config(ds.cfg, ds.config_path)
        return ds

    @classmethod
    def open(cls, root) -> "DatasetRoot":
        root = Path(root)
        return cls(root, load_config(root / "config.json"))

    @classmethod
    def open_or_create(cls, root, cfg: LabelConfig | None = None) -> "DatasetRoot":
        if (Path(root) / "config.json").exists():
            return cls.open(root)
        return cls.create(root, cfg)

    # -- paths -----------------------------------------------------------

    @property
    def config_path(self) -> Path:
        return self.root / "config.json"

    @property
    def images_dir(self) -> Path:
        return self.root / "images"

    @property
    def masks_dir(self) -> Path:
        return self.root / "masks"

    @property
    def instances_dir(self) -> Path:
        return self.root / "instances"

    # -- config ----------------------------------------------------------

    def set_config(self, cfg: LabelConfig) -> None:
        """Replace the label registry and rewrite config.json."""
        self.cfg = cfg
        save_config(cfg, self.config_path)

    # -- naming ----------------------------------------------------------

    def names(self) -> list[str]:
        """Stems of saved pairs, lexicographically sorted."""
        if not self.images_dir.is_dir():
            return []
        return sorted(p.stem for p in self.images_dir.glob("*.png"))

    def next_name(self) -> str:
        highest = -1
        for name in self.names():
            if name.isdigit():
                highest = max(highest, int(name))
        return f"{highest + 1:0{NAME_WIDTH}d}"

    def __len__(self) -> int:
        return len(self.names())

    # -- pairs -----------------------------------------------------------

    def save_pair(
        self,
        name: str,
        frame: np.ndarray,
        cmask: np.ndarray,
        instances: list[tuple[str, Mask]] | None = None,
    ) -> dict[str, Path]:
        """Write one image/mask pair (and optional per-layer instance masks).

        Never overwrites: a name already on disk raises DuplicateName.
        """
        if not _NAME_RE.match(name or ""):
            raise ValueError(f"name {name!r} is not filesystem-safe")
        frame = np.asarray(frame, dtype=np.uint8)
        cmask = np.asarray(cmask, dtype=np.uint8)
        if frame.ndim != 3 or frame.shape[2] != 3:
            raise ValueError(f"frame must be (H, W, 3) RGB, got {frame.shape}")
        if frame.shape != cmask.shape:
            raise DimensionMismatch(f"frame {frame.shape} vs mask {cmask.shape}")
        _check_mask_colors(cmask, self.cfg, name)

        image_path = self.images_dir / f"{name}.png"
        mask_path = self.masks_dir / f"{name}.png"
        if image_path.exists() or mask_path.exists():
            raise DuplicateName(f"pair {name!r} already saved")
        self.images_dir.mkdir(parents=True, exist_ok=True)
        self.masks_dir.mkdir(parents=True, exist_ok=True)
        _write_png_rgb(image_path, frame)
        _write_png_rgb(mask_path, cmask)
        saved = {"image": image_path, "mask": mask_path}

        if instances is not None:
            pair_dir = self.instances_dir / name
            pair_dir.mkdir(parents=True, exist_ok=True)
            for k, (label_name, mask) in enumerate(instances):
                self.cfg.get(label_name)
                if mask.shape != frame.shape[:2]:
                    raise DimensionMismatch(
                        f"instance {k} mask {mask.shape} vs frame {frame.shape[:2]}"
                    )
                path = pair_dir / f"{k}_{label_name}.png"
                Image.fromarray(
                    np.where(mask, 255, 0).astype(np.uint8), mode="L"
                ).save(path, format="PNG")
                saved[f"instance_{k}"] = path
        return saved

    def load_pair(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        image_path = self.images_dir / f"{name}.png"
        mask_path = self.masks_dir / f"{name}.png"
        if not image_path.exists():
            raise MissingImage(f"{image_path} does not exist")
        if not mask_path.exists():
            raise MissingMask(f"{mask_path} does not exist")
        frame = _read_png_rgb(image_path)
        cmask = _read_png_rgb(mask_path)
        if frame.shape != cmask.shape:
            raise DimensionMismatch(
                f"{name}: image {frame.shape} vs mask {cmask.shape}"
            )
        _check_mask_colors(cmask, self.cfg, name)
        return frame, cmask

    def load_mask(self, name: str) -> np.ndarray:
        mask_path = self.masks_dir / f"{name}.png"
        if not mask_path.exists():
            raise MissingMask(f"{mask_path} does not exist")
        return _read_png_rgb(mask_path)

    # -- statistics -------------------------------------------------------

    def class_frequencies(self, include_background: bool = False) -> dict[str, float]:
        """Relative pixel frequency per category over every saved mask.

        All images contribute to one global pixel pool. With
        ``include_background=False`` fractions are taken over non-black
        pixels only (all zero when nothing is annotated); otherwise the
        background fraction appears under the key ``"background"``.
        """
        by_code = {
            (label.color[0] << 16) | (label.color[1] << 8) | label.color[2]: label.name
            for label in self.cfg
        }
        counts = {label.name: 0 for label in self.cfg}
        background = 0
        total = 0
        for name in self.names():
            cmask = self.load_mask(name)
            _check_mask_colors(cmask, self.cfg, name)
            codes, tallies = np.unique(_encode_colors(cmask), return_counts=True)
            for code, tally in zip(codes, tallies):
                total += int(tally)
                if int(code) == 0:
                    background += int(tally)
                else:
                    counts[by_code[int(code)]] += int(tally)

        denominator = total if include_background else total - background
        fractions = {
            name: (count / denominator if denominator else 0.0)
            for name, count in counts.items()
        }
        if include_background:
            fractions["background"] = background / denominator if denominator else 0.0
        return fractions


def validate_dataset(root) -> list[str]:
    """Check a dataset directory; returns violation strings, empty if clean.

    Verifies the config schema, image/mask pairing, matching dimensions,
    and that every mask color belongs to the config.
    """
    root = Path(root)
    problems: list[str] = []
    try:
        ds = DatasetRoot.open(root)
    except FileNotFoundError:
        return [f"config.json missing under {root}"]
    except Exception as exc:
        return [f"config.json invalid: {exc}"]

    images = {p.stem for p in ds.images_dir.glob("*.png")} if ds.images_dir.is_dir() else set()
    masks = {p.stem for p in ds.masks_dir.glob("*.png")} if ds.masks_dir.is_dir() else set()
    for orphan in sorted(images - masks):
        problems.append(f"image without mask: images/{orphan}.png")
    for orphan in sorted(masks - images):
        problems.append(f"mask without image: masks/{orphan}.png")

    for name in sorted(images & masks):
        try:
            ds.load_pair(name)
        except Exception as exc:
            problems.append(f"pair {name}: {exc}")
    return problems
