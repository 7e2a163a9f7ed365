import base64
import io
import json
import shutil
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from scenepaint.core import ObjectInstance, RoomSpec, assemble_scene, box_mesh
from scenepaint.painter import MockPainter, NullScorer
from scenepaint.pipeline import JobConfig, texture_scene
from scenepaint.service import create_app
from scenepaint.storage import Project, load_project, save_project, save_textured_scene
from scenepaint.storage.ply import POINT_DTYPE


def build_project(root) -> Project:
    room = RoomSpec(4, 4, 3)
    alpha = ObjectInstance(
        "alpha", box_mesh((0.8, 0.8, 0.8)), translation=np.array([1.0, 0.3, 0.4]),
        description="a storage box",
    )
    bravo = ObjectInstance(
        "bravo", box_mesh((0.6, 1.0, 0.6)), translation=np.array([-1.0, -0.8, 0.3]),
        description="a low bench",
    )
    scene = assemble_scene(room, [alpha, bravo], style_prompt="plain style")
    return Project(
        root=root,
        scene=scene,
        job_config=JobConfig(seed=5, pano_width=128, persp_resolution=96, candidates=2),
    )


@pytest.fixture(scope="module")
def textured_dir(tmp_path_factory):
    """Project textured once (directly, not over HTTP) and persisted."""
    root = tmp_path_factory.mktemp("svc") / "proj"
    project = build_project(root)
    save_project(project)
    ts = texture_scene(project.scene, MockPainter(), NullScorer(), project.job_config)
    save_textured_scene(ts, project.state_dir / "textured")
    return root


@pytest.fixture()
def client(textured_dir, tmp_path):
    """Each test gets its own copy of the textured project."""
    root = tmp_path / "proj"
    shutil.copytree(textured_dir, root)
    project = load_project(root)
    app = create_app(project, backend=MockPainter(), scorer=NullScorer())
    with TestClient(app) as tc:
        yield tc


@pytest.fixture()
def fresh_client(tmp_path):
    """Untextured project, for the texture-job test."""
    project = build_project(tmp_path / "proj")
    save_project(project)
    app = create_app(project, backend=MockPainter(), scorer=NullScorer())
    with TestClient(app) as tc:
        yield tc


def wait_for_job(client, job_id, timeout=300.0):
    deadline = time.time() + timeout
    percents = []
    while time.time() < deadline:
        body = client.get(f"/v1/jobs/{job_id}").json()
        percents.append(body["percent"])
        if body["stage"] in ("done", "failed"):
            return body, percents
        time.sleep(0.2)
    raise TimeoutError(f"job {job_id} did not finish")


class TestSceneEndpoint:
    def test_untextured_descriptor(self, fresh_client):
        body = fresh_client.get("/v1/scene").json()
        assert body["revision"] == 0
        assert body["textured"] is False
        assert {o["id"] for o in body["objects"]} == {"alpha", "bravo"}
        assert body["room"]["width"] == 4

    def test_preview_before_texture_is_409(self, fresh_client):
        cam = json.dumps({"position": [0, 0, 1.5], "target": [1, 0, 0.5], "resolution": 64})
        assert fresh_client.get("/v1/preview", params={"cam": cam}).status_code == 409

    def test_textured_descriptor(self, client):
        body = client.get("/v1/scene").json()
        assert body["textured"] is True
        assert body["revision"] == 1
        assert body["total_points"] > 0
        assert set(body["owners"]) == {"room", "alpha", "bravo"}


class TestTextureJob:
    def test_texture_job_percent_monotone_to_100(self, fresh_client):
        job = fresh_client.post("/v1/texture", json={}).json()
        body, percents = wait_for_job(fresh_client, job["job_id"])
        assert body["stage"] == "done", body
        assert percents == sorted(percents)
        assert percents[-1] == 100.0
        assert fresh_client.get("/v1/scene").json()["textured"] is True

        # Replayed SSE stream carries the whole job history in order.
        events = []
        with fresh_client.stream(
            "GET", "/v1/events", params={"max_events": 500, "since": 0}
        ) as stream:
            for line in stream.iter_lines():
                if line.startswith("data: "):
                    events.append(json.loads(line[len("data: "):]))
        progress = [e for e in events if e.get("type") == "progress"]
        assert progress
        assert any(e.get("type") == "job-done" for e in events)
        sequences = [e["sequence"] for e in events]
        assert sequences == sorted(sequences)


class TestPreviewAndCloud:
    def test_preview_renders_png(self, client):
        cam = json.dumps({"position": [0, 0, 1.5], "target": [1, 0, 0.5], "resolution": 64})
        response = client.get("/v1/preview", params={"cam": cam})
        assert response.status_code == 200
        img = Image.open(io.BytesIO(response.content))
        assert img.size == (64, 64)
        assert response.headers["X-Scene-Revision"] == "1"

    def test_cloud_stream_parses_as_ply(self, client):
        response = client.get("/v1/cloud", params={"owner": "alpha"})
        assert response.status_code == 200
        header, _, payload = response.content.partition(b"end_header\n")
        count = int(
            [ln for ln in header.split(b"\n") if ln.startswith(b"element vertex")][0].split()[-1]
        )
        assert len(payload) == count * 17
        record = np.frombuffer(payload, dtype=POINT_DTYPE)
        scene = client.get("/v1/scene").json()
        alpha = next(o for o in scene["objects"] if o["id"] == "alpha")
        assert count == alpha["points"]
        assert record["owner"].min() == record["owner"].max()

        assert client.get("/v1/cloud", params={"owner": "nope"}).status_code == 404

    def test_bad_camera_is_422(self, client):
        assert client.get("/v1/preview", params={"cam": "{broken"}).status_code == 422


class TestEdits:
    def test_out_of_room_translate_is_422_and_unchanged(self, client):
        before = client.get("/v1/scene").json()
        response = client.post(
            "/v1/edits",
            json={"kind": "translate", "target_id": "alpha", "translation": [9, 0, 0]},
        )
        assert response.status_code == 422
        assert client.get("/v1/scene").json() == before

    def test_translate_bumps_revision(self, client):
        before = client.get("/v1/scene").json()["revision"]
        response = client.post(
            "/v1/edits",
            json={"kind": "translate", "target_id": "alpha", "translation": [0.2, 0, 0]},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["applied"] is True
        assert body["revision"] == before + 1
        assert client.get("/v1/scene").json()["revision"] == before + 1

    def test_unknown_kind_is_422(self, client):
        assert client.post("/v1/edits", json={"kind": "explode"}).status_code == 422

    def test_unknown_target_is_422(self, client):
        assert client.post(
            "/v1/edits", json={"kind": "remove", "target_id": "ghost"}
        ).status_code == 422

    def test_concurrent_edits_serialize_with_orders(self, client):
        results = []

        def push(delta):
            response = client.post(
                "/v1/edits",
                json={"kind": "translate", "target_id": "alpha", "translation": delta},
            )
            results.append(response.json())

        threads = [
            threading.Thread(target=push, args=([0.05, 0, 0],)),
            threading.Thread(target=push, args=([-0.05, 0, 0],)),
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        orders = sorted(r["order"] for r in results)
        assert orders[0] != orders[1]
        revisions = sorted(r["revision"] for r in results)
        assert revisions[1] == revisions[0] + 1

    def test_region_repaint_via_api(self, client):
        mask = np.zeros((64, 64), dtype=np.uint8)
        mask[20:44, 20:44] = 255
        buf = io.BytesIO()
        Image.fromarray(mask, mode="L").save(buf, format="PNG")
        body = {
            "kind": "repaint-region",
            "prompt": "marble tiles",
            "camera": {
                "position": [0, 0, 1.5], "target": [0, 0, 0.0],
                "focal": 30, "resolution": 64,
            },
            "mask_png_base64": base64.b64encode(buf.getvalue()).decode(),
        }
        before = client.get("/v1/scene").json()["revision"]
        response = client.post("/v1/edits", json=body)
        assert response.status_code == 200
        payload = response.json()
        assert payload["applied"] is False and payload["job_id"]
        status, _ = wait_for_job(client, payload["job_id"])
        assert status["stage"] == "done", status
        assert client.get("/v1/scene").json()["revision"] == before + 1
