"""Local HTTP service tying sources, layers, labels, and datasets together.

One :class:`AnnotationSession` owns all mutable state and is guarded by
a re-entrant lock, so concurrent requests can never interleave inside a
mutation: layer ids come out gap-free and composites are never torn.
Frame producers (MJPEG pumps) run on their own threads and talk to the
session only through source mailboxes.

The session walks a three-mode state machine. ``live`` reads fresh
frames from the active source. ``capture`` freezes the newest frame
(``frozen`` mode) so edits and the eventual saved mask refer to exactly
one image; an edit posted during live view freezes implicitly for the
same reason. ``review`` re-opens a stored dataset pair read-only except
for fresh annotation. Saving composites the stack, writes the pair, and
clears the stack.

Endpoints live under ``/api``; bodies are UTF-8 JSON except image
payloads, which are PNG with ``X-Sequence``/``X-Mode`` headers.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from io import BytesIO
from pathlib import Path

import numpy as np
from PIL import Image

from . import geometry
from .dataset import DatasetRoot
from .errors import (
    DimensionMismatch,
    EndOfStream,
    InvalidTransition,
    MaskStackError,
    NoActiveSource,
    SchemaViolation,
    SourceStalled,
    UnknownLabel,
    UnknownLayer,
    UnknownSource,
)
from .labels import LabelConfig, add_label, config_to_dict, remove_label
from .layers import (
    Layer,
    LayerSource,
    LayerStack,
    blend_preview,
    composite,
    delete_layer,
    export_instances,
    push_layer,
)
from .raster import fill_polygon
from .sources import SourceRegistry, enumerate_sources
from .threshold import threshold_mask, threshold_within

DEFAULT_PORT = 8750


def _png_bytes(array: np.ndarray, mode: str = "RGB") -> bytes:
    buf = BytesIO()
    Image.fromarray(array, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


class AnnotationSession:
    """Single-annotator session state; callers must hold :attr:`lock`."""

    def __init__(self, registry: SourceRegistry, dataset: DatasetRoot):
        self.lock = threading.RLock()
        self.registry = registry
        self.dataset = dataset
        self.config: LabelConfig = dataset.cfg
        self.mode = "live"
        self.active_slot: int | None = None
        self.frozen = None
        self.review_index: int | None = None
        self.review_name: str | None = None
        self.review_pixels: np.ndarray | None = None
        self.stack: LayerStack | None = None
        self._layer_counter = 0
        for descriptor in enumerate_sources(registry):
            if descriptor["default"]:
                self.active_slot = descriptor["slot"]
                break

    # -- frames and modes --------------------------------------------

    def _source(self):
        if self.active_slot is None:
            raise NoActiveSource("no frame source configured")
        try:
            return self.registry.get(self.active_slot)
        except UnknownSource as exc:
            raise NoActiveSource(str(exc)) from exc

    def frame_png(self) -> tuple[bytes, int, str]:
        """Current frame as PNG bytes plus sequence number and mode."""
        if self.mode == "live":
            frame = self._source().next_frame()
            return _png_bytes(frame.pixels), frame.sequence, "live"
        if self.mode == "frozen":
            return _png_bytes(self.frozen.pixels), self.frozen.sequence, "frozen"
        stored = self.dataset.images_dir / f"{self.review_name}.png"
        return stored.read_bytes(), 0, "review"

    def edit_pixels(self) -> np.ndarray:
        """Pixels of the frame edits apply to; auto-freezes live view."""
        if self.mode == "live":
            self.capture()
        if self.mode == "frozen":
            return self.frozen.pixels
        return self.review_pixels

    def capture(self) -> dict:
        if self.mode != "live":
            raise InvalidTransition(f"capture requires live mode, not {self.mode}")
        frame = self._source().capture_still()
        self.frozen = frame
        self.stack = LayerStack(frame.width, frame.height)
        self.mode = "frozen"
        return {"mode": "frozen", "sequence": frame.sequence,
                "width": frame.width, "height": frame.height}

    def _reset_view(self) -> None:
        self.mode = "live"
        self.frozen = None
        self.review_index = None
        self.review_name = None
        self.review_pixels = None
        self.stack = None

    def release(self) -> dict:
        if self.mode == "live":
            raise InvalidTransition("release requires a frozen or review frame")
        self._reset_view()
        return {"mode": "live"}

    def enter_review(self, index: int) -> dict:
        names = self.dataset.names()
        if not 0 <= index < len(names):
            raise IndexError(f"dataset index {index} out of range 0..{len(names) - 1}"
                             if names else "dataset is empty")
        name = names[index]
        pixels, _ = self.dataset.load_pair(name)
        self.mode = "review"
        self.review_index = index
        self.review_name = name
        self.review_pixels = pixels
        self.frozen = None
        self.stack = LayerStack(pixels.shape[1], pixels.shape[0])
        return {"mode": "review", "index": index, "name": name,
                "width": pixels.shape[1], "height": pixels.shape[0]}

    def select_source(self, slot: int) -> dict:
        self.registry.get(slot)
        self.active_slot = slot
        self._reset_view()
        return {"active": slot, "mode": "live"}

    # -- layers ------------------------------------------------------

    def _push(self, label_name: str, mask, source: LayerSource) -> dict:
        self._layer_counter += 1
        layer = Layer(self._layer_counter, label_name, mask, source)
        self.stack = push_layer(self.stack, layer)
        return {"id": layer.id, "empty": layer.empty,
                "popcount": int(np.count_nonzero(mask))}

    def add_layer(self, body: dict) -> dict:
        if not isinstance(body, dict):
            raise SchemaViolation("layer request must be a JSON object")
        label_name = body.get("label")
        if not isinstance(label_name, str) or label_name not in self.config:
            raise UnknownLabel(f"unknown label {label_name!r}")
        pixels = self.edit_pixels()
        height, width = pixels.shape[:2]

        if "path" in body:
            path = geometry.path_from_wire(body["path"])
            polygon = geometry.flatten_path(
                path, float(body.get("tolerance", geometry.DEFAULT_FLATTEN_TOL))
            )
            mask = fill_polygon(polygon, width, height)
            return self._push(label_name, mask, LayerSource.PATH)

        if "polygon" in body:
            polygon = [_as_point(p) for p in _expect_list(body["polygon"])]
            mask = fill_polygon(polygon, width, height)
            return self._push(label_name, mask, LayerSource.FREEHAND)

        if "threshold" in body:
            threshold = _expect_int(body["threshold"], "threshold")
            polarity = body.get("polarity", "dark-foreground")
            if "region" in body and body["region"] is not None:
                region_path = geometry.path_from_wire(body["region"])
                region = fill_polygon(
                    geometry.flatten_path(region_path), width, height
                )
                mask = threshold_within(pixels, region, threshold, polarity)
            else:
                mask = threshold_mask(pixels, threshold, polarity)
            return self._push(label_name, mask, LayerSource.THRESHOLD)

        raise SchemaViolation(
            'layer request needs one of "path", "polygon", or "threshold"'
        )

    def remove_layer(self, layer_id: int) -> dict:
        if self.stack is None:
            raise UnknownLayer(f"no layer {layer_id}: nothing is frozen")
        self.stack = delete_layer(self.stack, layer_id)
        return {"deleted": layer_id, "layers": len(self.stack)}

    # -- saving ------------------------------------------------------

    def annotate(self, instances: bool = False) -> dict:
        if self.mode == "live":
            raise InvalidTransition("freeze a frame (capture) before annotating")
        pixels = self.edit_pixels()
        cmask = composite(self.stack, self.config)
        name = self.dataset.next_name()
        inst = export_instances(self.stack, self.config) if instances else None
        self.dataset.save_pair(name, pixels, cmask, instances=inst)
        self.stack = LayerStack(self.stack.frame_width, self.stack.frame_height)
        return {"image_name": name}

    # -- labels ------------------------------------------------------

    def set_labels(self, cfg: LabelConfig) -> dict:
        self.dataset.set_config(cfg)
        self.config = cfg
        return config_to_dict(cfg)

    def add_label(self, body: dict) -> dict:
        if not isinstance(body, dict) or "name" not in body or "color" not in body:
            raise SchemaViolation('label request needs "name" and "color"')
        return self.set_labels(add_label(self.config, body["name"], body["color"]))

    def remove_label(self, name: str) -> dict:
        if self.stack is not None and any(
            layer.label_name == name for layer in self.stack
        ):
            raise InvalidTransition(
                f"label {name!r} is used by an open layer; delete the layer first"
            )
        return self.set_labels(remove_label(self.config, name))

    # -- previews ----------------------------------------------------

    def threshold_preview(self, body: dict) -> bytes:
        threshold = _expect_int(body.get("threshold"), "threshold")
        polarity = body.get("polarity", "dark-foreground")
        pixels = self._preview_pixels()
        mask = threshold_mask(pixels, threshold, polarity)
        return _png_bytes(mask.astype(np.uint8) * 255, mode="L")

    def blend(self, body: dict) -> bytes:
        opacity = body.get("opacity", 0.5)
        if not isinstance(opacity, (int, float)) or isinstance(opacity, bool):
            raise SchemaViolation("opacity must be a number")
        if self.mode == "live" or self.stack is None:
            raise InvalidTransition("blend preview requires a frozen or review frame")
        pixels = self.edit_pixels()
        cmask = composite(self.stack, self.config)
        return _png_bytes(blend_preview(pixels, cmask, float(opacity)))

    def _preview_pixels(self) -> np.ndarray:
        if self.mode == "frozen":
            return self.frozen.pixels
        if self.mode == "review":
            return self.review_pixels
        return self._source().capture_still().pixels

    # -- introspection -----------------------------------------------

    def state(self) -> dict:
        frame = None
        sequence = 0
        if self.mode == "frozen":
            frame = {"width": self.frozen.width, "height": self.frozen.height}
            sequence = self.frozen.sequence
        elif self.mode == "review":
            frame = {"width": self.review_pixels.shape[1],
                     "height": self.review_pixels.shape[0]}
        layers = []
        if self.stack is not None:
            layers = [
                {"id": layer.id, "label": layer.label_name,
                 "source": layer.source.value, "empty": layer.empty,
                 "popcount": int(np.count_nonzero(layer.mask))}
                for layer in self.stack
            ]
        return {
            "mode": self.mode,
            "active_source": self.active_slot,
            "review_index": self.review_index,
            "sequence": sequence,
            "frame": frame,
            "labels": config_to_dict(self.config)["labels"],
            "layers": layers,
            "dataset_count": len(self.dataset),
        }

    def close(self) -> None:
        self.registry.close_all()


def _expect_list(value) -> list:
    if not isinstance(value, list):
        raise SchemaViolation(f"expected a list, got {type(value).__name__}")
    return value


def _as_point(value) -> tuple[float, float]:
    if (not isinstance(value, (list, tuple)) or len(value) != 2 or any(
            isinstance(c, bool) or not isinstance(c, (int, float)) for c in value)):
        raise SchemaViolation(f"point must be [x, y], got {value!r}")
    return float(value[0]), float(value[1])


def _expect_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(f"{name} must be an integer, got {value!r}")
    return value


def _status_for(exc: Exception) -> int:
    if isinstance(exc, (SourceStalled, EndOfStream)):
        return 503
    if isinstance(exc, (NoActiveSource, InvalidTransition, DimensionMismatch)):
        return 409
    if isinstance(exc, LookupError):
        return 404
    if isinstance(exc, (ValueError, MaskStackError)):
        return 400
    if isinstance(exc, OSError):
        return 500
    return 500


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "maskstack"

    # Set by make_server on the class it builds.
    session: AnnotationSession
    static_dir: Path | None = None

    def log_message(self, format, *args):
        if getattr(self.server, "verbose", False):
            super().log_message(format, *args)

    # -- plumbing ----------------------------------------------------

    def _send(self, status: int, payload: bytes, content_type: str,
              extra: dict[str, str] | None = None) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Cache-Control", "no-store")
        for name, value in (extra or {}).items():
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(payload)

    def _json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload).encode("utf-8")
        self._send(status, body, "application/json; charset=utf-8")

    def _png(self, data: bytes, sequence: int, mode: str) -> None:
        self._send(200, data, "image/png",
                   {"X-Sequence": str(sequence), "X-Mode": mode})

    def _error(self, exc: Exception) -> None:
        self._json({"error": type(exc).__name__, "detail": str(exc)},
                   _status_for(exc))

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            data = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SchemaViolation(f"request body is not valid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise SchemaViolation("request body must be a JSON object")
        return data

    # -- routing -----------------------------------------------------

    def do_GET(self):
        self._route("GET")

    def do_POST(self):
        self._route("POST")

    def do_DELETE(self):
        self._route("DELETE")

    def _route(self, method: str) -> None:
        path, _, query = self.path.partition("?")
        parts = [p for p in path.split("/") if p]
        try:
            if not parts or parts[0] != "api":
                if method == "GET":
                    self._static(path)
                    return
                self._json({"error": "NotFound", "detail": path}, 404)
                return
            self._api(method, parts[1:], query)
        except BrokenPipeError:
            pass
        except Exception as exc:  # every handler error becomes JSON
            try:
                self._error(exc)
            except BrokenPipeError:
                pass

    def _api(self, method: str, parts: list[str], query: str) -> None:
        session = self.session
        if not parts:
            self._json({"service": "annotation-engine", "api": 1})
            return

        head, rest = parts[0], parts[1:]
        with session.lock:
            if method == "GET":
                if head == "frame" and not rest:
                    data, seq, mode = session.frame_png()
                    self._png(data, seq, mode)
                elif head == "state" and not rest:
                    self._json(session.state())
                elif head == "labels" and not rest:
                    self._json(config_to_dict(session.config))
                elif head == "sources" and not rest:
                    self._json({
                        "sources": enumerate_sources(session.registry),
                        "active": session.active_slot,
                    })
                elif head == "dataset" and not rest:
                    names = session.dataset.names()
                    self._json({"count": len(names), "names": names})
                elif head == "dataset" and len(rest) == 1:
                    self._json(session.enter_review(_path_int(rest[0])))
                elif head == "frequencies" and not rest:
                    include = "include_background=1" in query or \
                        "include_background=true" in query
                    self._json({"frequencies":
                                session.dataset.class_frequencies(include)})
                else:
                    self._json({"error": "NotFound", "detail": self.path}, 404)
                return

            if method == "POST":
                if head == "layers" and not rest:
                    self._json(session.add_layer(self._body()), 201)
                elif head == "annotate" and not rest:
                    body = self._body()
                    self._json(session.annotate(bool(body.get("instances", False))))
                elif head == "capture" and not rest:
                    self._json(session.capture())
                elif head == "release" and not rest:
                    self._json(session.release())
                elif head == "labels" and not rest:
                    self._json(session.add_label(self._body()), 201)
                elif head == "source" and len(rest) == 1:
                    self._json(session.select_source(_path_int(rest[0])))
                elif head == "threshold" and not rest:
                    self._png(session.threshold_preview(self._body()), 0, session.mode)
                elif head == "blend" and not rest:
                    self._png(session.blend(self._body()), 0, session.mode)
                else:
                    self._json({"error": "NotFound", "detail": self.path}, 404)
                return

            if head == "layers" and len(rest) == 1:
                self._json(session.remove_layer(_path_int(rest[0])))
            elif head == "labels" and len(rest) == 1:
                self._json(session.remove_label(rest[0]))
            else:
                self._json({"error": "NotFound", "detail": self.path}, 404)

    # -- static frontend ---------------------------------------------

    _STATIC_TYPES = {
        ".html": "text/html; charset=utf-8",
        ".js": "text/javascript; charset=utf-8",
        ".css": "text/css; charset=utf-8",
        ".map": "application/json",
        ".svg": "image/svg+xml",
        ".png": "image/png",
        ".ico": "image/x-icon",
    }

    def _static(self, path: str) -> None:
        root = self.static_dir
        if root is None:
            self._json({"error": "NotFound",
                        "detail": "no UI bundle configured; API lives under /api"},
                       404)
            return
        name = path.lstrip("/") or "index.html"
        file = (root / name).resolve()
        if not str(file).startswith(str(root.resolve())) or not file.is_file():
            self._json({"error": "NotFound", "detail": path}, 404)
            return
        ctype = self._STATIC_TYPES.get(file.suffix.lower(), "application/octet-stream")
        self._send(200, file.read_bytes(), ctype)


def _path_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise SchemaViolation(f"expected an integer path segment, got {text!r}") from None


def make_server(
    session: AnnotationSession,
    host: str = "127.0.0.1",
    port: int = DEFAULT_PORT,
    static_dir=None,
    verbose: bool = False,
) -> ThreadingHTTPServer:
    """Bind a threading HTTP server; caller runs serve_forever/shutdown."""
    handler = type("BoundHandler", (_Handler,), {
        "session": session,
        "static_dir": Path(static_dir) if static_dir else None,
    })
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    server.verbose = verbose
    return server
