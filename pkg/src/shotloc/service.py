"""Human-triage HTTP service: review queue, verdicts, annotations, imagery."""

from __future__ import annotations

import io
import json

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from PIL import Image
from pydantic import BaseModel, Field

from .config import PipelineConfig
from .evaluation import (BACKGROUND_COLORS, GUN_POSITIONS, OBSTRUCTIONS,
                         POSES, RESOLUTION_CLASSES, SMOKE_COLORS)
from .floio import read_flo
from .flowviz import flow_to_color
from .pipeline import Pipeline, read_jsonl, segment_key
from .verdicts import CorruptStore

ANNOTATION_SCHEMA = {
    "attributes": {
        "smoke_color": {"type": "enum", "values": list(SMOKE_COLORS)},
        "smoke_intensity": {"type": "integer", "min": 1, "max": 5},
        "background_color": {"type": "enum", "values": list(BACKGROUND_COLORS)},
        "resolution_class": {"type": "enum", "values": list(RESOLUTION_CLASSES)},
        "camera_far": {"type": "boolean"},
        "gun_stable": {"type": "boolean"},
        "shooter_moves": {"type": "boolean"},
        "camera_moves": {"type": "boolean"},
        "gun_position": {"type": "enum", "values": list(GUN_POSITIONS)},
        "obstruction": {"type": "enum", "values": list(OBSTRUCTIONS)},
        "pose": {"type": "enum", "values": list(POSES)},
    },
    "geometry": {
        "shooter_bbox": {"type": "bbox"},
        "smoke_bbox": {"type": "bbox"},
        "muzzle_point": {"type": "point"},
    },
}


class VerdictIn(BaseModel):
    visible_gunshot: bool
    reviewer: str = Field(min_length=1)
    notes: str = ""


class AnnotationIn(BaseModel):
    frame_index: int = Field(ge=0)
    shooter_bbox: list[float] = Field(min_length=4, max_length=4)
    smoke_bbox: list[float] = Field(min_length=4, max_length=4)
    muzzle_point: list[float] = Field(min_length=2, max_length=2)
    attributes: dict = Field(default_factory=dict)


def _png_response(rgb) -> Response:
    image = Image.fromarray(rgb)
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return Response(content=buf.getvalue(), media_type="image/png")


def create_app(config: PipelineConfig, run_id: str) -> FastAPI:
    pipeline = Pipeline(config, run_id=run_id)
    run_dir = pipeline.run_dir
    try:
        pipeline.verdict_store().live()  # fail fast on a corrupt log
    except CorruptStore as exc:
        raise RuntimeError(str(exc)) from exc

    app = FastAPI(title="shotloc review service")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        errors = [{"field": ".".join(str(p) for p in e["loc"][1:]) or "body",
                   "message": e["msg"]} for e in exc.errors()]
        return JSONResponse(status_code=400, content={"errors": errors})

    def reranked() -> list[dict]:
        return read_jsonl(run_dir / "scores_reranked.jsonl")

    def gated() -> list[dict]:
        return read_jsonl(run_dir / "gated.jsonl")

    def segment_payload(rec: dict) -> dict:
        fps = pipeline.video_fps(rec["source_id"])
        verdicts = pipeline.verdict_store().live()
        verdict = verdicts.get(segment_key(rec))
        if verdict is None:
            state = "unreviewed"
        else:
            state = "confirmed" if verdict.visible_gunshot else "rejected"
        gated_keys = {segment_key(g) for g in gated()}
        return {
            "segment_id": segment_key(rec),
            "video_id": rec["source_id"],
            "start": rec["start"],
            "duration": rec["duration"],
            "confidence": rec["confidence"],
            "rank": rec["rank"],
            "stage": rec["stage"],
            "frame_first": int(round(rec["start"] * fps)),
            "frame_last": int(round((rec["start"] + rec["duration"]) * fps)),
            "review_state": state,
            "gated": segment_key(rec) in gated_keys,
        }

    def find_segment(segment_id: str) -> dict:
        for rec in reranked() or gated():
            if segment_key(rec) == segment_id:
                return rec
        raise HTTPException(status_code=404,
                            detail=f"unknown segment {segment_id}")

    @app.get("/api/videos")
    def list_videos():
        by_video: dict[str, dict] = {}
        for rec in reranked():
            entry = by_video.setdefault(
                rec["source_id"], {"video_id": rec["source_id"],
                                   "n_segments": 0, "n_gated": 0})
            entry["n_segments"] += 1
        for rec in gated():
            by_video[rec["source_id"]]["n_gated"] += 1
        return {"videos": sorted(by_video.values(),
                                 key=lambda v: v["video_id"])}

    @app.get("/api/videos/{video_id}/segments")
    def video_segments(video_id: str, min_conf: float = 0.0):
        records = [segment_payload(r) for r in reranked()
                   if r["source_id"] == video_id
                   and r["confidence"] >= min_conf]
        if not records:
            raise HTTPException(status_code=404,
                                detail=f"no segments for video {video_id}")
        return {"segments": records}

    @app.get("/api/review/next")
    def next_review():
        verdicts = pipeline.verdict_store().live()
        queue = [r for r in gated() if segment_key(r) not in verdicts]
        queue.sort(key=lambda r: (-r["confidence"], r["start"], r["source_id"]))
        return {"segment": segment_payload(queue[0]) if queue else None,
                "remaining": len(queue)}

    @app.post("/api/segments/{segment_id}/verdict")
    def post_verdict(segment_id: str, verdict: VerdictIn):
        find_segment(segment_id)
        saved = pipeline.verdict_store().record(
            segment_ref=segment_id, visible_gunshot=verdict.visible_gunshot,
            reviewer=verdict.reviewer, notes=verdict.notes)
        return {"ok": True, "verdict": {
            "segment_ref": saved.segment_ref,
            "visible_gunshot": saved.visible_gunshot,
            "reviewer": saved.reviewer, "timestamp": saved.timestamp,
            "notes": saved.notes}}

    @app.post("/api/segments/{segment_id}/annotations")
    def post_annotation(segment_id: str, annotation: AnnotationIn):
        rec = find_segment(segment_id)
        attrs = annotation.attributes
        for key, value in attrs.items():
            spec = ANNOTATION_SCHEMA["attributes"].get(key)
            if spec is None:
                raise HTTPException(
                    status_code=400,
                    detail={"errors": [{"field": f"attributes.{key}",
                                        "message": "unknown attribute"}]})
            if spec["type"] == "enum" and value not in spec["values"]:
                raise HTTPException(
                    status_code=400,
                    detail={"errors": [{"field": f"attributes.{key}",
                                        "message":
                                        f"must be one of {spec['values']}"}]})
            if spec["type"] == "integer" and (
                    not isinstance(value, int)
                    or not spec["min"] <= value <= spec["max"]):
                raise HTTPException(
                    status_code=400,
                    detail={"errors": [{"field": f"attributes.{key}",
                                        "message":
                                        f"must be an integer in "
                                        f"[{spec['min']}, {spec['max']}]"}]})
        pipeline.annotation_store().record({
            "segment_ref": segment_id,
            "video_id": rec["source_id"],
            "frame_index": annotation.frame_index,
            "shooter_bbox": annotation.shooter_bbox,
            "smoke_bbox": annotation.smoke_bbox,
            "muzzle_point": annotation.muzzle_point,
            "attributes": attrs,
        })
        return {"ok": True}

    def _video_of(segment_id: str) -> str:
        return find_segment(segment_id)["source_id"]

    @app.get("/api/segments/{segment_id}/frames/{n}")
    def segment_frame(segment_id: str, n: int):
        video_id = _video_of(segment_id)
        files = pipeline.frame_files(video_id)
        if n not in files:
            raise HTTPException(status_code=404, detail=f"frame {n} not found")
        from .frames import read_pnm
        frame = read_pnm(files[n])
        if frame.rgb is not None:
            return _png_response(frame.rgb)
        import numpy as np
        gray = (frame.gray * 255).astype("uint8")
        return _png_response(np.repeat(gray[..., None], 3, axis=2))

    @app.get("/api/segments/{segment_id}/flow/{n}")
    def segment_flow(segment_id: str, n: int):
        video_id = _video_of(segment_id)
        flo = run_dir / "flow" / video_id / f"{n:06d}.flo"
        if not flo.exists():
            raise HTTPException(status_code=404,
                                detail=f"no flow for frame {n}")
        return _png_response(flow_to_color(read_flo(flo)).rgb)

    @app.get("/api/segments/{segment_id}/overlay/{n}")
    def segment_overlay(segment_id: str, n: int):
        video_id = _video_of(segment_id)
        path = run_dir / "overlays" / video_id / f"{n:06d}.ppm"
        if not path.exists():
            raise HTTPException(status_code=404,
                                detail=f"no overlay for frame {n}")
        from .frames import read_pnm
        return _png_response(read_pnm(path).rgb)

    @app.get("/api/report")
    def report():
        path = run_dir / "report.json"
        if not path.exists():
            raise HTTPException(status_code=404,
                                detail="evaluation has not run")
        return json.loads(path.read_text())

    @app.get("/api/schema/annotation")
    def annotation_schema():
        return ANNOTATION_SCHEMA

    return app


def serve_review(config: PipelineConfig, run_id: str) -> None:
    """Run the review service until interrupted."""
    import socket

    import uvicorn

    app = create_app(config, run_id)
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((config.service.host, config.service.port))
    except OSError as exc:
        raise RuntimeError(
            f"cannot bind {config.service.host}:{config.service.port} "
            f"({exc.strerror}); is another serve running? "
            f"pick a different [service] port in the config") from exc
    finally:
        probe.close()
    uvicorn.run(app, host=config.service.host, port=config.service.port)
