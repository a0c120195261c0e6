"""Pluggable frame suppliers: image directory, synthetic pattern, MJPEG.

Every source hands out :class:`Frame` snapshots with strictly
increasing sequence numbers. Directory and synthetic sources are
pull-driven: each ``next_frame`` advances them one step, so their
output is fully deterministic. The MJPEG source runs a producer thread
that decodes the network stream into a single-slot latest-frame
mailbox; consumers always see the newest frame, never an older one, and
frames skipped between reads are counted rather than queued.

A registry holds up to four sources in fixed slots, mirroring hardware
capture rigs that expose a small number of devices.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DecodeError,
    EndOfStream,
    SlotOutOfRange,
    SourceStalled,
    UnknownSource,
)
from .mjpeg import MjpegClient

MAX_DEVICES = 4

_FRAME_FILE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")


@dataclass(frozen=True)
class Frame:
    """One RGB snapshot; pixels are read-only uint8 (height, width, 3)."""

    pixels: np.ndarray
    sequence: int
    timestamp: float

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.uint8)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise ValueError(f"frame pixels must be (h, w, 3), got {pixels.shape}")
        if self.sequence < 1:
            raise ValueError("sequence numbers start at 1")
        if not pixels.flags.writeable:
            object.__setattr__(self, "pixels", pixels)
            return
        pixels = pixels.copy()
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


class FrameSource:
    """Interface shared by all sources.

    ``next_frame`` returns the most recent frame, advancing pull-driven
    sources one step; sequence numbers strictly increase across its
    returns. ``capture_still`` freezes the current frame without
    advancing: repeated captures return the same frame, and the first
    capture on a fresh source pulls one.
    """

    kind = "unknown"
    location = ""

    _current: Frame | None = None

    def next_frame(self) -> Frame:
        raise NotImplementedError

    def capture_still(self) -> Frame:
        if self._current is None:
            return self.next_frame()
        return self._current

    @property
    def available(self) -> bool:
        return True

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class DirectorySource(FrameSource):
    """Replays the image files of a directory in lexicographic order."""

    kind = "directory"

    def __init__(self, path, loop: bool = False):
        self.path = Path(path)
        self.loop = loop
        self.location = str(self.path)
        if not self.path.is_dir():
            raise NotADirectoryError(f"not a directory: {self.path}")
        self._files = sorted(
            p for p in self.path.iterdir()
            if p.is_file() and p.suffix.lower() in _FRAME_FILE_SUFFIXES
        )
        self._pos = 0
        self._seq = 0

    def next_frame(self) -> Frame:
        if self._pos >= len(self._files):
            if not (self.loop and self._files):
                raise EndOfStream(f"{self.path}: no frames left")
            self._pos = 0
        file = self._files[self._pos]
        self._pos += 1
        try:
            with Image.open(file) as img:
                pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
        except (UnidentifiedImageError, OSError, ValueError) as exc:
            raise DecodeError(f"unreadable image file {file} ({exc})") from exc
        self._seq += 1
        self._current = Frame(pixels, self._seq, time.time())
        return self._current

    @property
    def available(self) -> bool:
        return bool(self._files) and (self.loop or self._pos < len(self._files))


class SyntheticSource(FrameSource):
    """Seeded moving test pattern; frame k is a pure function of (seed, k).

    A horizontal brightness ramp (threshold fodder) carries three
    orbiting disks: one dark, one bright, one saturated red. The seed
    offsets the orbit phase so differently seeded sources disagree.
    """

    kind = "synthetic"

    def __init__(self, width: int = 320, height: int = 240, seed: int = 0):
        if width <= 0 or height <= 0:
            raise ValueError("synthetic frame dimensions must be positive")
        self.width = width
        self.height = height
        self.seed = int(seed)
        self.location = f"seed={self.seed}"
        self._seq = 0
        yy, xx = np.mgrid[0:height, 0:width]
        self._xx = xx
        self._yy = yy
        ramp = (xx * 255) // max(1, width - 1)
        self._base = np.repeat(ramp[:, :, None], 3, axis=2).astype(np.uint8)

    def render(self, sequence: int) -> np.ndarray:
        """Pixels of the given frame index (1-based), with no side effects."""
        img = self._base.copy()
        phase = (self.seed % 997) * (2.0 * math.pi / 997.0)
        t = sequence / 24.0
        cx0, cy0 = self.width / 2.0, self.height / 2.0
        orbit = 0.30 * min(self.width, self.height)
        radius = 0.12 * min(self.width, self.height)
        colors = ((16, 16, 16), (240, 240, 240), (220, 40, 30))
        for i, color in enumerate(colors):
            ang = phase + t + i * 2.0 * math.pi / 3.0
            cx = cx0 + orbit * math.cos(ang)
            cy = cy0 + orbit * math.sin(ang)
            disk = (self._xx - cx) ** 2 + (self._yy - cy) ** 2 <= radius * radius
            img[disk] = color
        return img

    def next_frame(self) -> Frame:
        self._seq += 1
        self._current = Frame(self.render(self._seq), self._seq, time.time())
        return self._current


class MjpegSource(FrameSource):
    """Network stream consumer: producer thread plus latest-frame mailbox.

    ``next_frame`` blocks until a frame newer than the last one returned
    is available, so its callers still observe strictly increasing
    sequence numbers even though intermediate frames may be dropped
    (``dropped`` counts those). When the producer dies its terminal
    error is replayed to callers once the mailbox drains.
    """

    kind = "mjpeg"

    def __init__(self, url: str, timeout: float = 5.0):
        self.url = url
        self.location = url
        self.timeout = timeout
        self._cond = threading.Condition()
        self._latest: Frame | None = None
        self._latest_read = False
        self._error: Exception | None = None
        self._returned_seq = 0
        self.dropped = 0
        self._client = MjpegClient(url, timeout=timeout)
        self._thread = threading.Thread(
            target=self._pump, name=f"mjpeg-pump {url}", daemon=True
        )
        self._thread.start()

    def _pump(self) -> None:
        seq = 0
        try:
            while True:
                pixels = self._client.next_frame()
                seq += 1
                frame = Frame(pixels, seq, time.time())
                with self._cond:
                    if self._latest is not None and not self._latest_read:
                        self.dropped += 1
                    self._latest = frame
                    self._latest_read = False
                    self._cond.notify_all()
        except Exception as exc:
            with self._cond:
                self._error = exc
                self._cond.notify_all()

    def next_frame(self) -> Frame:
        deadline = time.monotonic() + self.timeout
        with self._cond:
            while True:
                if self._latest is not None and self._latest.sequence > self._returned_seq:
                    self._latest_read = True
                    self._returned_seq = self._latest.sequence
                    self._current = self._latest
                    return self._latest
                if self._error is not None:
                    raise self._error
                remaining = deadline - time.monotonic()
                if remaining <= 0 or not self._cond.wait(timeout=remaining):
                    raise SourceStalled(
                        f"{self.url}: no new frame within {self.timeout:.1f}s"
                    )

    @property
    def available(self) -> bool:
        with self._cond:
            return self._error is None or self._latest is not None

    def close(self) -> None:
        self._client.close()
        if self._thread.is_alive():
            self._thread.join(timeout=2.0)


def open_source(spec: str) -> FrameSource:
    """Build a source from a CLI-style spec string.

    Accepted forms: ``dir:<path>``, ``mjpeg:<url>``, ``synthetic``,
    ``synthetic:<seed>``.
    """
    kind, sep, rest = spec.partition(":")
    if kind == "dir":
        if not sep or not rest:
            raise ValueError(f"bad source spec {spec!r}: expected dir:<path>")
        return DirectorySource(rest, loop=True)
    if kind == "mjpeg":
        if not rest.startswith("http://") and not rest.startswith("https://"):
            raise ValueError(f"bad source spec {spec!r}: expected mjpeg:http://...")
        return MjpegSource(rest)
    if kind == "synthetic":
        if not sep:
            return SyntheticSource()
        try:
            return SyntheticSource(seed=int(rest))
        except ValueError:
            raise ValueError(
                f"bad source spec {spec!r}: expected synthetic[:<integer seed>]"
            ) from None
    raise ValueError(
        f"unknown source kind {kind!r}: expected dir: | mjpeg: | synthetic"
    )


class SourceRegistry:
    """Up to four sources in fixed slots 0..3."""

    def __init__(self, sources=()):
        sources = list(sources)
        if len(sources) > MAX_DEVICES:
            raise SlotOutOfRange(
                f"{len(sources)} sources configured; the registry caps at "
                f"{MAX_DEVICES} devices"
            )
        self._slots: dict[int, FrameSource] = {}
        self._lock = threading.Lock()
        for slot, source in enumerate(sources):
            self.attach(slot, source)

    def attach(self, slot: int, source: FrameSource) -> None:
        if not 0 <= slot < MAX_DEVICES:
            raise SlotOutOfRange(f"slot {slot} outside 0..{MAX_DEVICES - 1}")
        with self._lock:
            old = self._slots.get(slot)
            self._slots[slot] = source
        if old is not None:
            old.close()

    def detach(self, slot: int) -> None:
        with self._lock:
            if slot not in self._slots:
                raise UnknownSource(f"no source at slot {slot}")
            source = self._slots.pop(slot)
        source.close()

    def get(self, slot: int) -> FrameSource:
        with self._lock:
            if slot not in self._slots:
                raise UnknownSource(f"no source at slot {slot}")
            return self._slots[slot]

    def slots(self) -> dict[int, FrameSource]:
        with self._lock:
            return dict(self._slots)

    def __len__(self) -> int:
        with self._lock:
            return len(self._slots)

    def close_all(self) -> None:
        with self._lock:
            sources = list(self._slots.values())
            self._slots.clear()
        for source in sources:
            source.close()


def enumerate_sources(registry: SourceRegistry) -> list[dict]:
    """Slot-ordered descriptors; the first available one is the default."""
    descriptors = []
    default_found = False
    slots = registry.slots()
    for slot in sorted(slots):
        source = slots[slot]
        available = source.available
        is_default = available and not default_found
        default_found = default_found or is_default
        descriptors.append({
            "slot": slot,
            "kind": source.kind,
            "location": source.location,
            "status": "available" if available else "unavailable",
            "default": is_default,
        })
    return descriptors
