"""Consume a motion-JPEG stream from a toy loopback camera.

Stands up a tiny HTTP server that plays eight JPEG-compressed frames of
the built-in moving test pattern as a multipart/x-mixed-replace stream,
the wire format IP cameras speak.  MjpegClient then pulls the frames
back out and we compare each one against the pattern it was encoded
from (JPEG is lossy, so the check is mean absolute error, not
equality).
"""

from __future__ import annotations

import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from io import BytesIO
from time import sleep

import numpy as np
from PIL import Image

from maskstack.mjpeg import MjpegClient
from maskstack.sources import SyntheticSource

BOUNDARY = "toycam"
FRAME_COUNT = 8


def jpeg_bytes(rgb: np.ndarray, quality: int = 90) -> bytes:
    buf = BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="JPEG", quality=quality)
    return buf.getvalue()


class ToyCamera(BaseHTTPRequestHandler):
    payloads: list[bytes] = []

    def log_message(self, *args):
        pass

    def do_GET(self):
        self.send_response(200)
        self.send_header(
            "Content-Type", f"multipart/x-mixed-replace; boundary={BOUNDARY}"
        )
        self.end_headers()
        for payload in self.payloads:
            self.wfile.write(
                f"--{BOUNDARY}\r\n"
                f"Content-Type: image/jpeg\r\n"
                f"Content-Length: {len(payload)}\r\n\r\n".encode("ascii")
            )
            self.wfile.write(payload + b"\r\n")
            self.wfile.flush()
            sleep(0.02)  # a camera paces its frames
        self.wfile.write(f"--{BOUNDARY}--\r\n".encode("ascii"))


def main() -> None:
    pattern = SyntheticSource(160, 120, seed=21)
    originals = [pattern.render(n) for n in range(FRAME_COUNT)]
    ToyCamera.payloads = [jpeg_bytes(rgb) for rgb in originals]

    server = ThreadingHTTPServer(("127.0.0.1", 0), ToyCamera)
    server.daemon_threads = True
    thread = threading.Thread(target=server.serve_forever,
                              kwargs={"poll_interval": 0.05}, daemon=True)
    thread.start()
    url = f"http://127.0.0.1:{server.server_address[1]}/stream"
    print(f"toy camera at {url}")

    try:
        with MjpegClient(url, timeout=2.0) as client:
            for n, frame in enumerate(client):
                err = float(np.abs(
                    frame.astype(np.int16) - originals[n].astype(np.int16)
                ).mean())
                print(f"frame {n}: {frame.shape[1]}x{frame.shape[0]}, "
                      f"mean |err| vs original {err:.2f}")
                assert frame.shape == originals[n].shape
                assert err < 4.0, "JPEG round trip drifted too far"
            print(f"stream ended cleanly after {n + 1} frames")
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=2.0)


if __name__ == "__main__":
    main()
