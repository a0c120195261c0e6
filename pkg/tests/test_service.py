from __future__ import annotations

import http.client
import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from io import BytesIO
from types import SimpleNamespace

import numpy as np
import pytest
import requests
from PIL import Image

from maskstack import (
    AnnotationSession,
    DatasetRoot,
    DirectorySource,
    SourceRegistry,
    SyntheticSource,
    blend_preview,
    composite,
    fill_polygon,
    flatten_path,
    load_config,
    make_server,
    path_from_wire,
    threshold_mask,
    validate_dataset,
)

RECT = [[2, 2], [10, 2], [10, 8], [2, 8]]


def png_rgb(data: bytes) -> np.ndarray:
    with Image.open(BytesIO(data)) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def png_gray(data: bytes) -> np.ndarray:
    with Image.open(BytesIO(data)) as img:
        assert img.mode == "L"
        return np.asarray(img, dtype=np.uint8)


@contextmanager
def live_server(session):
    server = make_server(session, port=0)
    thread = threading.Thread(
        target=lambda: server.serve_forever(poll_interval=0.05), daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()
        session.close()


@pytest.fixture
def service(tmp_path, four_label_cfg):
    dataset = DatasetRoot.create(tmp_path / "ds", four_label_cfg)
    registry = SourceRegistry([
        SyntheticSource(64, 48, seed=3),
        SyntheticSource(32, 24, seed=9),
    ])
    session = AnnotationSession(registry, dataset)
    with live_server(session) as base:
        yield SimpleNamespace(base=base, session=session, dataset=dataset,
                              cfg=four_label_cfg)


def freeze(svc) -> np.ndarray:
    """Capture the live frame and return its pixels as the tests see them."""
    assert requests.post(svc.base + "/api/capture").status_code == 200
    resp = requests.get(svc.base + "/api/frame")
    assert resp.headers["X-Mode"] == "frozen"
    return png_rgb(resp.content)


class TestMeta:
    def test_api_root(self, service):
        resp = requests.get(service.base + "/api")
        assert resp.status_code == 200
        assert resp.json() == {"service": "annotation-engine", "api": 1}

    def test_unknown_endpoint(self, service):
        resp = requests.get(service.base + "/api/nope")
        assert resp.status_code == 404
        assert resp.json()["error"] == "NotFound"

    def test_no_ui_bundle_hint(self, service):
        resp = requests.get(service.base + "/")
        assert resp.status_code == 404
        assert "/api" in resp.json()["detail"]

    def test_malformed_json_body(self, service):
        resp = requests.post(service.base + "/api/layers", data=b"{oops",
                             headers={"Content-Type": "application/json"})
        assert resp.status_code == 400
        assert resp.json()["error"] == "SchemaViolation"

    def test_non_object_body(self, service):
        resp = requests.post(service.base + "/api/layers", json=[1, 2])
        assert resp.status_code == 400


class TestFrames:
    def test_live_frames_advance(self, service):
        first = requests.get(service.base + "/api/frame")
        second = requests.get(service.base + "/api/frame")
        assert first.headers["Content-Type"] == "image/png"
        assert first.headers["X-Mode"] == "live"
        assert (first.headers["X-Sequence"], second.headers["X-Sequence"]) == ("1", "2")
        twin = SyntheticSource(64, 48, seed=3)
        assert np.array_equal(png_rgb(first.content), twin.render(1))
        assert np.array_equal(png_rgb(second.content), twin.render(2))

    def test_capture_freezes_stream(self, service):
        resp = requests.post(service.base + "/api/capture")
        body = resp.json()
        assert body["mode"] == "frozen"
        assert body["sequence"] == 1
        assert (body["width"], body["height"]) == (64, 48)
        a = requests.get(service.base + "/api/frame")
        b = requests.get(service.base + "/api/frame")
        assert a.content == b.content
        assert a.headers["X-Mode"] == "frozen"

    def test_capture_requires_live(self, service):
        requests.post(service.base + "/api/capture")
        resp = requests.post(service.base + "/api/capture")
        assert resp.status_code == 409
        assert resp.json()["error"] == "InvalidTransition"

    def test_release_returns_to_live(self, service):
        requests.post(service.base + "/api/capture")
        assert requests.post(service.base + "/api/release").json() == {"mode": "live"}
        assert requests.get(service.base + "/api/state").json()["mode"] == "live"

    def test_release_requires_frozen(self, service):
        assert requests.post(service.base + "/api/release").status_code == 409

    def test_no_source_conflict(self, tmp_path, four_label_cfg):
        dataset = DatasetRoot.create(tmp_path / "ds", four_label_cfg)
        session = AnnotationSession(SourceRegistry(), dataset)
        with live_server(session) as base:
            resp = requests.get(base + "/api/frame")
            assert resp.status_code == 409
            assert resp.json()["error"] == "NoActiveSource"
            assert requests.post(base + "/api/capture").status_code == 409

    def test_exhausted_source_is_unavailable(self, tmp_path, four_label_cfg):
        frames = tmp_path / "frames"
        frames.mkdir()
        Image.fromarray(np.full((6, 8, 3), 77, dtype=np.uint8)).save(
            frames / "only.png")
        dataset = DatasetRoot.create(tmp_path / "ds", four_label_cfg)
        session = AnnotationSession(
            SourceRegistry([DirectorySource(frames)]), dataset)
        with live_server(session) as base:
            assert requests.get(base + "/api/frame").status_code == 200
            resp = requests.get(base + "/api/frame")
            assert resp.status_code == 503
            assert resp.json()["error"] == "EndOfStream"


class TestSources:
    def test_enumeration(self, service):
        body = requests.get(service.base + "/api/sources").json()
        assert body["active"] == 0
        assert [d["slot"] for d in body["sources"]] == [0, 1]
        assert body["sources"][0]["default"] is True
        assert body["sources"][0]["kind"] == "synthetic"

    def test_switch_changes_frame_geometry(self, service):
        assert requests.post(service.base + "/api/source/1").json() == {
            "active": 1, "mode": "live"}
        frame = png_rgb(requests.get(service.base + "/api/frame").content)
        assert frame.shape == (24, 32, 3)

    def test_switch_resets_frozen_state(self, service):
        requests.post(service.base + "/api/capture")
        requests.post(service.base + "/api/source/1")
        state = requests.get(service.base + "/api/state").json()
        assert state["mode"] == "live"
        assert state["layers"] == []

    def test_unknown_slot(self, service):
        assert requests.post(service.base + "/api/source/3").status_code == 404
        assert requests.post(service.base + "/api/source/abc").status_code == 400


class TestLabels:
    def test_listing_matches_config(self, service):
        body = requests.get(service.base + "/api/labels").json()
        assert [l["name"] for l in body["labels"]] == [
            "crescent", "spindle", "lattice", "bloom"]
        assert body["labels"][0]["color"] == [0, 255, 0]

    def test_add_label_persists(self, service):
        resp = requests.post(service.base + "/api/labels",
                             json={"name": "extra", "color": [10, 20, 30]})
        assert resp.status_code == 201
        assert resp.json()["labels"][-1] == {"name": "extra",
                                             "color": [10, 20, 30]}
        reloaded = load_config(service.dataset.config_path)
        assert "extra" in reloaded

    def test_add_label_rejections(self, service):
        post = lambda body: requests.post(service.base + "/api/labels", json=body)
        assert post({"name": "crescent", "color": [1, 2, 3]}).status_code == 400
        assert post({"name": "night", "color": [0, 0, 0]}).status_code == 400
        assert post({"name": "mystery"}).status_code == 400

    def test_remove_label(self, service):
        resp = requests.delete(service.base + "/api/labels/bloom")
        assert resp.status_code == 200
        assert "bloom" not in [l["name"] for l in resp.json()["labels"]]
        assert requests.delete(service.base + "/api/labels/ghost").status_code == 404

    def test_remove_label_blocked_by_open_layer(self, service):
        requests.post(service.base + "/api/layers",
                      json={"label": "crescent", "polygon": RECT})
        resp = requests.delete(service.base + "/api/labels/crescent")
        assert resp.status_code == 409
        requests.delete(service.base + "/api/layers/1")
        assert requests.delete(service.base + "/api/labels/crescent").status_code == 200


class TestLayers:
    def test_edit_autofreezes_live_view(self, service):
        resp = requests.post(service.base + "/api/layers",
                             json={"label": "crescent", "polygon": RECT})
        assert resp.status_code == 201
        assert requests.get(service.base + "/api/state").json()["mode"] == "frozen"

    def test_polygon_popcount(self, service):
        freeze(service)
        resp = requests.post(service.base + "/api/layers",
                             json={"label": "crescent", "polygon": RECT})
        expected = int(fill_polygon([tuple(p) for p in RECT], 64, 48).sum())
        assert resp.json() == {"id": 1, "empty": False, "popcount": expected}
        assert expected == 48

    def test_path_layer_matches_library_rasterization(self, service):
        freeze(service)
        wire = [
            {"kind": "bezier", "a": [5, 5], "g": [32, -6], "b": [58, 5]},
            {"kind": "line", "a": [58, 5], "b": [58, 40]},
            {"kind": "line", "a": [58, 40], "b": [5, 40]},
            {"kind": "line", "a": [5, 40], "b": [5, 5]},
        ]
        resp = requests.post(service.base + "/api/layers",
                             json={"label": "spindle", "path": wire})
        assert resp.status_code == 201
        polygon = flatten_path(path_from_wire(wire))
        expected = int(fill_polygon(polygon, 64, 48).sum())
        assert resp.json()["popcount"] == expected

    def test_path_layer_honors_tolerance(self, service):
        freeze(service)
        wire = [
            {"kind": "bezier", "a": [5, 5], "g": [32, -6], "b": [58, 5]},
            {"kind": "line", "a": [58, 5], "b": [5, 5]},
        ]
        resp = requests.post(
            service.base + "/api/layers",
            json={"label": "spindle", "path": wire, "tolerance": 2.0})
        polygon = flatten_path(path_from_wire(wire), 2.0)
        assert resp.json()["popcount"] == int(fill_polygon(polygon, 64, 48).sum())

    def test_threshold_layer(self, service):
        pixels = freeze(service)
        resp = requests.post(
            service.base + "/api/layers",
            json={"label": "lattice", "threshold": 128})
        expected = int(threshold_mask(pixels, 128, "dark-foreground").sum())
        assert resp.json()["popcount"] == expected

    def test_threshold_layer_with_region(self, service):
        pixels = freeze(service)
        region_wire = [
            {"kind": "line", "a": [0, 0], "b": [32, 0]},
            {"kind": "line", "a": [32, 0], "b": [32, 48]},
            {"kind": "line", "a": [32, 48], "b": [0, 48]},
            {"kind": "line", "a": [0, 48], "b": [0, 0]},
        ]
        resp = requests.post(
            service.base + "/api/layers",
            json={"label": "lattice", "threshold": 128,
                  "polarity": "bright-foreground", "region": region_wire})
        region = fill_polygon(flatten_path(path_from_wire(region_wire)), 64, 48)
        expected = threshold_mask(pixels, 128, "bright-foreground") & region
        assert resp.json()["popcount"] == int(expected.sum())

    def test_layer_request_rejections(self, service):
        freeze(service)
        post = lambda body: requests.post(service.base + "/api/layers", json=body)
        assert post({"label": "crescent"}).status_code == 400
        assert post({"label": "ghost", "polygon": RECT}).status_code == 404
        assert post({"label": "crescent", "threshold": True}).status_code == 400
        assert post({"label": "crescent", "polygon": [[1, 2], [3]]}).status_code == 400
        assert post({"label": "crescent",
                     "polygon": [[1, 2], [3, 4]]}).status_code == 400

    def test_delete_layer(self, service):
        freeze(service)
        requests.post(service.base + "/api/layers",
                      json={"label": "crescent", "polygon": RECT})
        requests.post(service.base + "/api/layers",
                      json={"label": "spindle", "threshold": 90})
        resp = requests.delete(service.base + "/api/layers/1")
        assert resp.json() == {"deleted": 1, "layers": 1}
        assert requests.delete(service.base + "/api/layers/1").status_code == 404

    def test_delete_layer_without_frozen_frame(self, service):
        assert requests.delete(service.base + "/api/layers/1").status_code == 404

    def test_concurrent_pushes_get_gap_free_ids(self, service):
        freeze(service)

        def push(_):
            # one connection per request: the point here is server-side
            # serialization, not client pool reuse
            resp = requests.post(service.base + "/api/layers",
                                 json={"label": "crescent", "polygon": RECT},
                                 headers={"Connection": "close"})
            assert resp.status_code == 201
            return resp.json()["id"]

        with ThreadPoolExecutor(max_workers=16) as pool:
            ids = list(pool.map(push, range(64)))
        assert sorted(ids) == list(range(1, 65))


class TestAnnotate:
    def annotate_one(self, svc) -> tuple[np.ndarray, np.ndarray]:
        """Freeze, draw a polygon and a threshold layer, save with instances."""
        pixels = freeze(svc)
        requests.post(svc.base + "/api/layers",
                      json={"label": "crescent", "polygon": RECT})
        requests.post(svc.base + "/api/layers",
                      json={"label": "spindle", "threshold": 128})
        resp = requests.post(svc.base + "/api/annotate", json={"instances": True})
        assert resp.status_code == 200
        expected = np.zeros((48, 64, 3), dtype=np.uint8)
        expected[fill_polygon([tuple(p) for p in RECT], 64, 48)] = (0, 255, 0)
        expected[threshold_mask(pixels, 128, "dark-foreground")] = (211, 179, 145)
        return pixels, expected

    def test_live_annotate_conflict(self, service):
        resp = requests.post(service.base + "/api/annotate", json={})
        assert resp.status_code == 409

    def test_round_trip(self, service):
        pixels, expected = self.annotate_one(service)
        image, cmask = service.dataset.load_pair("000000")
        assert np.array_equal(image, pixels)
        assert np.array_equal(cmask, expected)
        inst_dir = service.dataset.instances_dir / "000000"
        assert sorted(p.name for p in inst_dir.iterdir()) == [
            "0_crescent.png", "1_spindle.png"]
        assert validate_dataset(service.dataset.root) == []

    def test_stack_clears_but_frame_stays_frozen(self, service):
        self.annotate_one(service)
        state = requests.get(service.base + "/api/state").json()
        assert state["mode"] == "frozen"
        assert state["layers"] == []
        assert state["dataset_count"] == 1
        listing = requests.get(service.base + "/api/dataset").json()
        assert listing == {"count": 1, "names": ["000000"]}

    def test_empty_stack_saves_background_only(self, service):
        freeze(service)
        name = requests.post(service.base + "/api/annotate", json={}).json()
        assert name == {"image_name": "000000"}
        _, cmask = service.dataset.load_pair("000000")
        assert not cmask.any()

    def test_frequencies_endpoint(self, service):
        self.annotate_one(service)
        body = requests.get(service.base + "/api/frequencies").json()
        assert body["frequencies"] == service.dataset.class_frequencies()
        with_bg = requests.get(
            service.base + "/api/frequencies?include_background=1").json()
        assert "background" in with_bg["frequencies"]


class TestReview:
    def seed_pair(self, svc) -> bytes:
        freeze(svc)
        requests.post(svc.base + "/api/layers",
                      json={"label": "crescent", "polygon": RECT})
        requests.post(svc.base + "/api/annotate", json={})
        return (svc.dataset.images_dir / "000000.png").read_bytes()

    def test_review_serves_stored_bytes_verbatim(self, service):
        stored = self.seed_pair(service)
        meta = requests.get(service.base + "/api/dataset/0").json()
        assert meta == {"mode": "review", "index": 0, "name": "000000",
                        "width": 64, "height": 48}
        resp = requests.get(service.base + "/api/frame")
        assert resp.content == stored
        assert resp.headers["X-Mode"] == "review"
        assert resp.headers["X-Sequence"] == "0"

    def test_review_bounds(self, service):
        self.seed_pair(service)
        assert requests.get(service.base + "/api/dataset/5").status_code == 404
        assert requests.get(service.base + "/api/dataset/-1").status_code == 404
        assert requests.get(service.base + "/api/dataset/xyz").status_code == 400

    def test_annotating_in_review_saves_new_pair(self, service):
        self.seed_pair(service)
        requests.get(service.base + "/api/dataset/0")
        requests.post(service.base + "/api/layers",
                      json={"label": "bloom", "polygon": RECT})
        saved = requests.post(service.base + "/api/annotate", json={}).json()
        assert saved == {"image_name": "000001"}
        original, _ = service.dataset.load_pair("000000")
        duplicate, cmask = service.dataset.load_pair("000001")
        assert np.array_equal(original, duplicate)
        assert (cmask[fill_polygon([tuple(p) for p in RECT], 64, 48)]
                == (255, 8, 8)).all()

    def test_release_from_review(self, service):
        self.seed_pair(service)
        requests.get(service.base + "/api/dataset/0")
        assert requests.post(service.base + "/api/release").json() == {"mode": "live"}


class TestPreviews:
    def test_threshold_preview_matches_library(self, service):
        pixels = freeze(service)
        resp = requests.post(service.base + "/api/threshold",
                             json={"threshold": 100})
        got = png_gray(resp.content)
        expected = threshold_mask(pixels, 100, "dark-foreground")
        assert np.array_equal(got > 0, expected)
        assert set(np.unique(got)) <= {0, 255}

    def test_threshold_preview_in_live_keeps_mode(self, service):
        resp = requests.post(service.base + "/api/threshold",
                             json={"threshold": 100, "polarity": "bright-foreground"})
        assert resp.status_code == 200
        assert requests.get(service.base + "/api/state").json()["mode"] == "live"

    def test_threshold_preview_needs_integer(self, service):
        resp = requests.post(service.base + "/api/threshold",
                             json={"threshold": "dim"})
        assert resp.status_code == 400

    def test_blend_requires_frozen(self, service):
        resp = requests.post(service.base + "/api/blend", json={"opacity": 0.5})
        assert resp.status_code == 409

    def test_blend_matches_library(self, service, four_label_cfg):
        pixels = freeze(service)
        requests.post(service.base + "/api/layers",
                      json={"label": "crescent", "polygon": RECT})
        resp = requests.post(service.base + "/api/blend", json={"opacity": 0.4})
        cmask = np.zeros((48, 64, 3), dtype=np.uint8)
        cmask[fill_polygon([tuple(p) for p in RECT], 64, 48)] = (0, 255, 0)
        expected = blend_preview(pixels, cmask, 0.4)
        assert np.array_equal(png_rgb(resp.content), expected)

    def test_blend_rejects_bad_opacity(self, service):
        freeze(service)
        resp = requests.post(service.base + "/api/blend", json={"opacity": "high"})
        assert resp.status_code == 400


class TestState:
    def test_shape(self, service):
        freeze(service)
        requests.post(service.base + "/api/layers",
                      json={"label": "crescent", "polygon": RECT})
        state = requests.get(service.base + "/api/state").json()
        assert set(state) == {"mode", "active_source", "review_index",
                              "sequence", "frame", "labels", "layers",
                              "dataset_count"}
        assert state["frame"] == {"width": 64, "height": 48}
        assert state["layers"] == [{
            "id": 1, "label": "crescent", "source": "freehand",
            "empty": False, "popcount": 48,
        }]


class TestStatic:
    def test_serves_bundle(self, tmp_path, four_label_cfg):
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<html>canvas</html>")
        (ui / "app.js").write_text("let x = 1;")
        dataset = DatasetRoot.create(tmp_path / "ds", four_label_cfg)
        session = AnnotationSession(SourceRegistry(), dataset)
        server = make_server(session, port=0, static_dir=ui)
        thread = threading.Thread(
            target=lambda: server.serve_forever(poll_interval=0.05), daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{server.server_address[1]}"
        try:
            resp = requests.get(base + "/")
            assert resp.text == "<html>canvas</html>"
            assert resp.headers["Content-Type"].startswith("text/html")
            js = requests.get(base + "/app.js")
            assert js.headers["Content-Type"].startswith("text/javascript")
            assert requests.get(base + "/missing.css").status_code == 404

            (tmp_path / "secret.txt").write_text("keep out")
            conn = http.client.HTTPConnection("127.0.0.1",
                                              server.server_address[1])
            conn.request("GET", "/../secret.txt")
            assert conn.getresponse().status == 404
            conn.close()
        finally:
            server.shutdown()
            server.server_close()
            session.close()
