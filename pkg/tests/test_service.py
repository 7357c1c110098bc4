import io
import json

import pytest
from fastapi.testclient import TestClient
from PIL import Image

from shotloc.pipeline import Pipeline, write_jsonl
from shotloc.service import create_app


def craft_queue_run(synth_config, thresholded_run, run_id, confidences):
    import shutil
    dst = thresholded_run.parent / run_id
    if dst.exists():
        shutil.rmtree(dst)
    shutil.copytree(thresholded_run, dst)
    records = []
    for i, conf in enumerate(sorted(confidences, reverse=True)):
        records.append({"source_id": "case01", "start": float(i),
                        "duration": 3.0, "margin": 1.0, "confidence": conf,
                        "rank": i + 1, "stage": "reranked"})
    write_jsonl(dst / "scores_reranked.jsonl", records)
    write_jsonl(dst / "gated.jsonl", records)
    (dst / "verdicts.jsonl").unlink(missing_ok=True)
    (dst / "annotations.jsonl").unlink(missing_ok=True)
    return run_id


@pytest.fixture()
def queue_client(synth_config, thresholded_run, request):
    run_id = craft_queue_run(synth_config, thresholded_run,
                             f"svc-{request.node.name[:40]}",
                             confidences=[0.9, 0.8, 0.75])
    return TestClient(create_app(synth_config, run_id))


@pytest.fixture(scope="session")
def full_run(synth_config, thresholded_run):
    import shutil
    dst = thresholded_run.parent / "svc-full"
    if dst.exists():
        shutil.rmtree(dst)
    shutil.copytree(thresholded_run, dst)
    Pipeline(synth_config, run_id="svc-full", no_review=True).run()
    return "svc-full"


@pytest.fixture(scope="session")
def full_client(synth_config, full_run):
    return TestClient(create_app(synth_config, full_run))


def test_next_review_returns_highest_confidence(queue_client):
    body = queue_client.get("/api/review/next").json()
    assert body["segment"]["confidence"] == 0.9
    assert body["remaining"] == 3


def test_verdict_advances_the_queue(queue_client):
    first = queue_client.get("/api/review/next").json()["segment"]
    response = queue_client.post(
        f"/api/segments/{first['segment_id']}/verdict",
        json={"visible_gunshot": True, "reviewer": "ana"})
    assert response.status_code == 200
    body = queue_client.get("/api/review/next").json()
    assert body["segment"]["confidence"] == 0.8
    assert body["remaining"] == 2
    assert body["segment"]["segment_id"] != first["segment_id"]


def test_queue_drains_to_null(queue_client):
    for _ in range(3):
        seg = queue_client.get("/api/review/next").json()["segment"]
        queue_client.post(f"/api/segments/{seg['segment_id']}/verdict",
                          json={"visible_gunshot": False, "reviewer": "ana"})
    body = queue_client.get("/api/review/next").json()
    assert body["segment"] is None
    assert body["remaining"] == 0


def test_malformed_verdict_is_a_400_with_field_errors(queue_client):
    seg = queue_client.get("/api/review/next").json()["segment"]
    response = queue_client.post(
        f"/api/segments/{seg['segment_id']}/verdict",
        json={"visible_gunshot": "maybe"})
    assert response.status_code == 400
    errors = response.json()["errors"]
    fields = {e["field"] for e in errors}
    assert "visible_gunshot" in fields
    assert "reviewer" in fields


def test_verdict_for_unknown_segment_is_404(queue_client):
    response = queue_client.post("/api/segments/nope:123/verdict",
                                 json={"visible_gunshot": True,
                                       "reviewer": "ana"})
    assert response.status_code == 404


def test_videos_listing(queue_client):
    body = queue_client.get("/api/videos").json()
    assert body["videos"][0]["video_id"] == "case01"
    assert body["videos"][0]["n_segments"] == 3
    assert body["videos"][0]["n_gated"] == 3


def test_segments_filter_by_min_conf(queue_client):
    body = queue_client.get("/api/videos/case01/segments",
                            params={"min_conf": 0.79}).json()
    confs = [s["confidence"] for s in body["segments"]]
    assert confs == [0.9, 0.8]
    assert all(s["review_state"] == "unreviewed" for s in body["segments"])


def test_annotation_round_trip_feeds_evaluation(queue_client, synth_config,
                                                thresholded_run):
    seg = queue_client.get("/api/review/next").json()["segment"]
    payload = {
        "frame_index": 8,
        "shooter_bbox": [60, 70, 85, 150],
        "smoke_bbox": [120, 68, 140, 88],
        "muzzle_point": [101.25, 80.0],
        "attributes": {"smoke_color": "grey", "smoke_intensity": 4,
                       "pose": "standing"},
    }
    response = queue_client.post(
        f"/api/segments/{seg['segment_id']}/annotations", json=payload)
    assert response.status_code == 200


def test_annotation_intensity_out_of_range_is_400(queue_client):
    seg = queue_client.get("/api/review/next").json()["segment"]
    response = queue_client.post(
        f"/api/segments/{seg['segment_id']}/annotations",
        json={"frame_index": 8, "shooter_bbox": [0, 0, 1, 1],
              "smoke_bbox": [0, 0, 1, 1], "muzzle_point": [0, 0],
              "attributes": {"smoke_intensity": 6}})
    assert response.status_code == 400
    assert "smoke_intensity" in json.dumps(response.json())


def test_annotation_unknown_enum_is_400(queue_client):
    seg = queue_client.get("/api/review/next").json()["segment"]
    response = queue_client.post(
        f"/api/segments/{seg['segment_id']}/annotations",
        json={"frame_index": 8, "shooter_bbox": [0, 0, 1, 1],
              "smoke_bbox": [0, 0, 1, 1], "muzzle_point": [0, 0],
              "attributes": {"pose": "sitting"}})
    assert response.status_code == 400


def test_schema_endpoint_matches_annotation_enums(queue_client):
    schema = queue_client.get("/api/schema/annotation").json()
    assert schema["attributes"]["smoke_intensity"] == {
        "type": "integer", "min": 1, "max": 5}
    assert "standing" in schema["attributes"]["pose"]["values"]
    assert set(schema["geometry"]) == {"shooter_bbox", "smoke_bbox",
                                       "muzzle_point"}


def png_size(response):
    assert response.status_code == 200
    assert response.headers["content-type"] == "image/png"
    return Image.open(io.BytesIO(response.content)).size


def test_frame_endpoint_serves_png(full_client):
    seg = full_client.get("/api/videos/case01/segments").json()["segments"][0]
    size = png_size(full_client.get(
        f"/api/segments/{seg['segment_id']}/frames/{seg['frame_first']}"))
    assert size == (240, 180)


def test_flow_and_overlay_endpoints_serve_png(full_client):
    segments = full_client.get("/api/videos/case01/segments").json()["segments"]
    gated = [s for s in segments if s["confidence"] > 0.7]
    seg = min(gated, key=lambda s: s["start"])
    assert png_size(full_client.get(
        f"/api/segments/{seg['segment_id']}/flow/8")) == (240, 180)
    assert png_size(full_client.get(
        f"/api/segments/{seg['segment_id']}/overlay/8")) == (240, 180)


def test_missing_frame_is_404(full_client):
    seg = full_client.get("/api/videos/case01/segments").json()["segments"][0]
    response = full_client.get(f"/api/segments/{seg['segment_id']}/frames/9999")
    assert response.status_code == 404


def test_report_endpoint(full_client, queue_client):
    # before eval: 404; after the full run: the three columns at 100%
    assert queue_client.get("/api/report").status_code == 404
    body = full_client.get("/api/report").json()
    assert body["rates_pct"] == [100.0, 100.0, 100.0]
    assert body["columns"][0] == "Gun Cloud Detection Success rate"


def test_corrupt_verdict_store_refuses_to_start(synth_config, thresholded_run):
    run_id = craft_queue_run(synth_config, thresholded_run, "svc-corrupt",
                             confidences=[0.9])
    run_dir = thresholded_run.parent / run_id
    (run_dir / "verdicts.jsonl").write_text("{broken\n")
    with pytest.raises(RuntimeError) as err:
        create_app(synth_config, run_id)
    assert "drop the bad line" in str(err.value)


def test_review_state_transitions_after_verdicts(queue_client):
    seg = queue_client.get("/api/review/next").json()["segment"]
    queue_client.post(f"/api/segments/{seg['segment_id']}/verdict",
                      json={"visible_gunshot": True, "reviewer": "ana"})
    second = queue_client.get("/api/review/next").json()["segment"]
    queue_client.post(f"/api/segments/{second['segment_id']}/verdict",
                      json={"visible_gunshot": False, "reviewer": "ana"})
    states = {s["segment_id"]: s["review_state"]
              for s in queue_client.get("/api/videos/case01/segments"
                                        ).json()["segments"]}
    assert states[seg["segment_id"]] == "confirmed"
    assert states[second["segment_id"]] == "rejected"


def test_serve_refuses_an_occupied_port(synth_config, thresholded_run):
    import socket
    from shotloc.service import serve_review
    blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        blocker.bind((synth_config.service.host, 0))
        synth_config.service.port = blocker.getsockname()[1]
        with pytest.raises(RuntimeError) as err:
            serve_review(synth_config, "base")
        assert "cannot bind" in str(err.value)
    finally:
        blocker.close()
        synth_config.service.port = 8008
