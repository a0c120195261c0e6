"""Motion-JPEG over HTTP: multipart/x-mixed-replace parsing and a client.

The wire format is an endless HTTP response whose body is a sequence of
JPEG-bearing parts separated by a boundary line declared in the
Content-Type header. The parser here is a pure incremental state
machine fed raw bytes in whatever chunks the transport produces; it
never blocks, so it can be tested exhaustively under adversarial
re-chunking. :class:`MjpegClient` couples it to a socket with a stall
timeout.
"""

from __future__ import annotations

import http.client
import socket
import urllib.parse
from io import BytesIO

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, EndOfStream, SourceStalled

_MAX_HEADER_BLOCK = 64 * 1024


def parse_boundary(content_type: str) -> str:
    """Extract the part boundary from a multipart Content-Type header."""
    if not content_type:
        raise DecodeError("missing Content-Type header")
    media, _, rest = content_type.partition(";")
    if media.strip().lower() != "multipart/x-mixed-replace":
        raise DecodeError(f"not an MJPEG stream: Content-Type {media.strip()!r}")
    for param in rest.split(";"):
        name, sep, value = param.partition("=")
        if sep and name.strip().lower() == "boundary":
            value = value.strip().strip('"')
            # Some encoders ship the leading dashes inside the parameter.
            value = value.lstrip("-")
            if not value:
                break
            return value
    raise DecodeError(f"no boundary parameter in Content-Type {content_type!r}")


def _parse_headers(block: bytes) -> dict[str, str]:
    headers: dict[str, str] = {}
    for line in block.replace(b"\r\n", b"\n").split(b"\n"):
        name, sep, value = line.partition(b":")
        if sep:
            headers[name.strip().decode("latin-1").lower()] = (
                value.strip().decode("latin-1")
            )
    return headers


class MultipartParser:
    """Incremental splitter for multipart/x-mixed-replace byte streams.

    Feed it arbitrary byte chunks; it returns each completed part as
    ``(headers, body)``. Parts with a Content-Length header are sliced
    exactly; without one the body runs until the next boundary line.
    Both CRLF and bare LF line endings are tolerated.
    """

    def __init__(self, boundary: str):
        self._delim = b"--" + boundary.encode("ascii")
        self._buf = bytearray()
        self._in_part = False
        self.finished = False

    def feed(self, data: bytes) -> list[tuple[dict[str, str], bytes]]:
        if data:
            self._buf.extend(data)
        parts = []
        while not self.finished:
            part = self._step()
            if part is None:
                break
            parts.append(part)
        return parts

    def _step(self) -> tuple[dict[str, str], bytes] | None:
        if not self._in_part:
            idx = self._buf.find(self._delim)
            if idx < 0:
                # Keep only a possible delimiter prefix at the tail.
                keep = len(self._delim) - 1
                if len(self._buf) > keep:
                    del self._buf[:-keep]
                return None
            after = idx + len(self._delim)
            if self._buf[after : after + 2] == b"--":
                self.finished = True
                return None
            nl = self._buf.find(b"\n", after)
            if nl < 0:
                return None
            del self._buf[: nl + 1]
            self._in_part = True

        sep, sep_len = self._find_blank_line()
        if sep < 0:
            if len(self._buf) > _MAX_HEADER_BLOCK:
                raise DecodeError("part header block exceeds 64 KiB")
            return None
        headers = _parse_headers(bytes(self._buf[:sep]))
        body_start = sep + sep_len

        length = headers.get("content-length")
        if length is not None:
            try:
                n = int(length)
            except ValueError as exc:
                raise DecodeError(f"bad Content-Length {length!r}") from exc
            if len(self._buf) < body_start + n:
                return None
            body = bytes(self._buf[body_start : body_start + n])
            del self._buf[: body_start + n]
        else:
            idx = self._buf.find(self._delim, body_start)
            if idx < 0:
                return None
            end = idx
            if self._buf[end - 2 : end] == b"\r\n":
                end -= 2
            elif self._buf[end - 1 : end] == b"\n":
                end -= 1
            body = bytes(self._buf[body_start:end])
            del self._buf[:idx]
        self._in_part = False
        return headers, body

    def _find_blank_line(self) -> tuple[int, int]:
        crlf = self._buf.find(b"\r\n\r\n")
        lf = self._buf.find(b"\n\n")
        if crlf < 0 and lf < 0:
            return -1, 0
        if crlf < 0:
            return lf, 2
        if lf < 0 or crlf <= lf:
            return crlf, 4
        return lf, 2


def decode_jpeg(data: bytes) -> np.ndarray:
    """Decode one JPEG payload to an (h, w, 3) uint8 RGB array."""
    try:
        with Image.open(BytesIO(data)) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"unreadable JPEG part ({exc})") from exc


class MjpegClient:
    """Pull RGB frames from an MJPEG URL until EOF, stall, or close."""

    def __init__(self, url: str, timeout: float = 5.0, chunk_size: int = 65536):
        self.url = url
        self.timeout = timeout
        self._chunk_size = chunk_size
        parsed = urllib.parse.urlsplit(url)
        if parsed.scheme != "http":
            raise DecodeError(f"only http:// streams are supported, got {url!r}")
        self._conn = http.client.HTTPConnection(
            parsed.hostname, parsed.port or 80, timeout=timeout
        )
        path = parsed.path or "/"
        if parsed.query:
            path += "?" + parsed.query
        try:
            self._conn.request("GET", path)
            self._resp = self._conn.getresponse()
        except socket.timeout as exc:
            raise SourceStalled(f"{url}: no response within {timeout:.1f}s") from exc
        except OSError as exc:
            raise EndOfStream(f"{url}: connection failed ({exc})") from exc
        if self._resp.status != 200:
            raise DecodeError(f"{url}: HTTP {self._resp.status}")
        boundary = parse_boundary(self._resp.headers.get("Content-Type", ""))
        self._parser = MultipartParser(boundary)
        self._pending: list[tuple[dict[str, str], bytes]] = []

    def next_frame(self) -> np.ndarray:
        """Block for the next decoded frame.

        Raises SourceStalled after the configured quiet period,
        EndOfStream when the server closes or terminates the multipart
        sequence, and DecodeError on malformed parts.
        """
        while True:
            if self._pending:
                _, body = self._pending.pop(0)
                return decode_jpeg(body)
            if self._parser.finished:
                raise EndOfStream(f"{self.url}: stream terminated")
            try:
                chunk = self._resp.read1(self._chunk_size)
            except socket.timeout as exc:
                raise SourceStalled(
                    f"{self.url}: no data for {self.timeout:.1f}s"
                ) from exc
            except OSError as exc:
                raise EndOfStream(f"{self.url}: connection lost ({exc})") from exc
            if not chunk:
                raise EndOfStream(f"{self.url}: stream closed")
            self._pending.extend(self._parser.feed(chunk))

    def __iter__(self):
        return self

    def __next__(self) -> np.ndarray:
        try:
            return self.next_frame()
        except EndOfStream:
            raise StopIteration from None

    def close(self) -> None:
        try:
            self._conn.close()
        except OSError:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
