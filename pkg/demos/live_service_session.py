"""Scripted annotation session against an in-process HTTP service.

Boots the annotation service on an ephemeral loopback port, then walks
the same request sequence an interactive client would issue: list the
sources, add two labels, watch the live feed advance, freeze a frame,
push a polygon layer and a threshold layer, save the pair, and reopen
it in review mode.  Every response is printed as it arrives.
"""

from __future__ import annotations

import shutil
import threading
from pathlib import Path

import requests

from maskstack.dataset import DatasetRoot
from maskstack.service import AnnotationSession, make_server
from maskstack.sources import SourceRegistry, SyntheticSource

OUT = Path(__file__).parent / "out" / "session_dataset"


def show(step: str, payload) -> None:
    print(f"[{step}] {payload}")


def main() -> None:
    shutil.rmtree(OUT, ignore_errors=True)
    dataset = DatasetRoot.create(OUT)
    registry = SourceRegistry([SyntheticSource(96, 72, seed=5)])
    session = AnnotationSession(registry, dataset)

    server = make_server(session, port=0)
    thread = threading.Thread(
        target=server.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True
    )
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    print(f"service listening on {base}")

    try:
        show("hello", requests.get(f"{base}/api").json())
        show("sources", requests.get(f"{base}/api/sources").json())

        for name, color in (("ostracod", [0, 255, 0]), ("rotifer", [255, 8, 8])):
            reply = requests.post(
                f"{base}/api/labels", json={"name": name, "color": color}
            )
            show(f"add label {name}", f"{reply.status_code} {reply.json()}")

        for _ in range(2):
            frame = requests.get(f"{base}/api/frame")
            show(
                "live frame",
                f"sequence {frame.headers['X-Sequence']}, "
                f"{len(frame.content)} PNG bytes",
            )

        show("capture", requests.post(f"{base}/api/capture").json())

        polygon = {
            "label": "ostracod",
            "polygon": [[12, 10], [60, 14], [70, 50], [30, 60], [8, 38]],
        }
        reply = requests.post(f"{base}/api/layers", json=polygon)
        show("polygon layer", f"{reply.status_code} {reply.json()}")

        threshold = {
            "label": "rotifer",
            "threshold": 110,
            "polarity": "dark-foreground",
        }
        reply = requests.post(f"{base}/api/layers", json=threshold)
        show("threshold layer", f"{reply.status_code} {reply.json()}")

        state = requests.get(f"{base}/api/state").json()
        show("state", {"mode": state["mode"],
                       "layers": [(l["id"], l["label"]) for l in state["layers"]]})

        saved = requests.post(f"{base}/api/annotate", json={"instances": True}).json()
        show("annotate", saved)
        pair_dir = OUT / "instances" / saved["image_name"]
        show("instance files", sorted(p.name for p in pair_dir.iterdir()))
        show("frequencies", requests.get(f"{base}/api/frequencies").json())
        show("dataset", requests.get(f"{base}/api/dataset").json())

        show("review 0", requests.get(f"{base}/api/dataset/0").json())
        stored = requests.get(f"{base}/api/frame")
        show("review frame", f"mode {stored.headers['X-Mode']}, "
                             f"{len(stored.content)} PNG bytes")
        show("release", requests.post(f"{base}/api/release").json())
    finally:
        server.shutdown()
        server.server_close()
        session.close()
        thread.join(timeout=2.0)

    print(f"dataset written under {OUT}")


if __name__ == "__main__":
    main()
