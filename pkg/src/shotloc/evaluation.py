"""Per-video annotations, detection success criteria, and the summary report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyResults, MissingGroundTruth, SchemaError

SMOKE_COLORS = ("grey", "orange")
BACKGROUND_COLORS = ("grey", "white")
RESOLUTION_CLASSES = ("good", "medium", "bad")
GUN_POSITIONS = ("pointed_up", "sideways", "behind")
OBSTRUCTIONS = ("nothing", "people", "tree")
POSES = ("standing", "kneeling", "lying", "walking")

SMOKE_IOU_MIN = 0.3
SHOOTER_IOU_MIN = 0.5
MUZZLE_RADIUS_FRAC = 0.02   # of the frame diagonal

REPORT_COLUMNS = ("Gun Cloud Detection Success rate",
                  "Shooter Detection Rate",
                  "Muzzle Head Detection Rate")


@dataclass(frozen=True)
class GroundTruthEvent:
    frame_index: int
    smoke_bbox: tuple[float, float, float, float]
    shooter_bbox: tuple[float, float, float, float]
    muzzle_point: tuple[float, float]


@dataclass(frozen=True)
class CaseAnnotation:
    video_id: str
    frame_width: int
    frame_height: int
    smoke_color: str
    smoke_intensity: int
    background_color: str
    resolution_class: str
    camera_far: bool
    gun_stable: bool
    shooter_moves: bool
    camera_moves: bool
    gun_position: str
    obstruction: str
    pose: str
    ground_truth: tuple[GroundTruthEvent, ...]


@dataclass(frozen=True)
class CaseResult:
    video_id: str
    event_index: int
    smoke_success: bool
    shooter_success: bool
    muzzle_success: bool
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Report:
    denominator: int
    smoke_successes: int
    shooter_successes: int
    muzzle_successes: int
    thresholds: dict

    def rates_pct(self) -> tuple[float, float, float]:
        return (round_half_up_pct(self.smoke_successes, self.denominator),
                round_half_up_pct(self.shooter_successes, self.denominator),
                round_half_up_pct(self.muzzle_successes, self.denominator))


def round_half_up_pct(successes: int, denominator: int) -> float:
    """successes/denominator as a percentage with one half-up decimal."""
    tenths = (successes * 2000 + denominator) // (2 * denominator)
    return tenths / 10.0


def iou(a, b) -> float:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    ix = max(0.0, min(ax1, bx1) - max(ax0, bx0))
    iy = max(0.0, min(ay1, by1) - max(ay0, by0))
    inter = ix * iy
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union if union > 0 else 0.0


# --- annotation loading ------------------------------------------------------

def _need(doc: dict, key: str, path: str):
    if key not in doc:
        raise SchemaError(f"{path}.{key}", "missing field")
    return doc[key]


def _enum(doc: dict, key: str, allowed: tuple, path: str) -> str:
    value = _need(doc, key, path)
    if value not in allowed:
        raise SchemaError(f"{path}.{key}",
                          f"{value!r} not one of {sorted(allowed)}")
    return value


def _boolean(doc: dict, key: str, path: str) -> bool:
    value = _need(doc, key, path)
    if not isinstance(value, bool):
        raise SchemaError(f"{path}.{key}", f"expected boolean, got {value!r}")
    return value


def _box(value, path: str, width: int, height: int):
    if (not isinstance(value, (list, tuple)) or len(value) != 4
            or not all(isinstance(c, (int, float)) for c in value)):
        raise SchemaError(path, "expected [x0, y0, x1, y1]")
    x0, y0, x1, y1 = (float(c) for c in value)
    if not (x0 < x1 and y0 < y1):
        raise SchemaError(path, "box must have positive extent")
    if x0 < 0 or y0 < 0 or x1 > width or y1 > height:
        raise SchemaError(path, f"box exceeds {width}x{height} frame")
    return (x0, y0, x1, y1)


def _point(value, path: str):
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(c, (int, float)) for c in value)):
        raise SchemaError(path, "expected [x, y]")
    return (float(value[0]), float(value[1]))


def parse_annotation(doc: dict, path: str = "$") -> CaseAnnotation:
    if not isinstance(doc, dict):
        raise SchemaError(path, "annotation must be an object")
    video_id = str(_need(doc, "video_id", path))
    width = _need(doc, "frame_width", path)
    height = _need(doc, "frame_height", path)
    if not (isinstance(width, int) and isinstance(height, int)
            and width > 0 and height > 0):
        raise SchemaError(f"{path}.frame_width", "frame dims must be positive ints")
    intensity = _need(doc, "smoke_intensity", path)
    if not isinstance(intensity, int) or not 1 <= intensity <= 5:
        raise SchemaError(f"{path}.smoke_intensity",
                          f"{intensity!r} outside 1..5")
    events = []
    raw_events = _need(doc, "ground_truth", path)
    if not isinstance(raw_events, list):
        raise SchemaError(f"{path}.ground_truth", "expected a list of events")
    for i, ev in enumerate(raw_events):
        ev_path = f"{path}.ground_truth[{i}]"
        if not isinstance(ev, dict):
            raise SchemaError(ev_path, "event must be an object")
        frame_index = _need(ev, "frame_index", ev_path)
        if not isinstance(frame_index, int) or frame_index < 0:
            raise SchemaError(f"{ev_path}.frame_index", "expected index >= 0")
        events.append(GroundTruthEvent(
            frame_index=frame_index,
            smoke_bbox=_box(_need(ev, "smoke_bbox", ev_path),
                            f"{ev_path}.smoke_bbox", width, height),
            shooter_bbox=_box(_need(ev, "shooter_bbox", ev_path),
                              f"{ev_path}.shooter_bbox", width, height),
            muzzle_point=_point(_need(ev, "muzzle_point", ev_path),
                                f"{ev_path}.muzzle_point"),
        ))
    return CaseAnnotation(
        video_id=video_id,
        frame_width=width,
        frame_height=height,
        smoke_color=_enum(doc, "smoke_color", SMOKE_COLORS, path),
        smoke_intensity=intensity,
        background_color=_enum(doc, "background_color", BACKGROUND_COLORS, path),
        resolution_class=_enum(doc, "resolution_class", RESOLUTION_CLASSES, path),
        camera_far=_boolean(doc, "camera_far", path),
        gun_stable=_boolean(doc, "gun_stable", path),
        shooter_moves=_boolean(doc, "shooter_moves", path),
        camera_moves=_boolean(doc, "camera_moves", path),
        gun_position=_enum(doc, "gun_position", GUN_POSITIONS, path),
        obstruction=_enum(doc, "obstruction", OBSTRUCTIONS, path),
        pose=_enum(doc, "pose", POSES, path),
        ground_truth=tuple(events),
    )


def load_annotations(path: str | Path) -> list[CaseAnnotation]:
    """Load a JSON array of per-video annotation documents."""
    path = Path(path)
    docs = json.loads(path.read_text())
    if isinstance(docs, dict):
        docs = [docs]
    if not isinstance(docs, list):
        raise SchemaError("$", "expected an array of annotation documents")
    return [parse_annotation(doc, f"$[{i}]") for i, doc in enumerate(docs)]


# --- per-event evaluation ----------------------------------------------------

@dataclass
class VideoPredictions:
    """Model output for one video, indexed by frame."""

    smoke_bboxes: dict[int, tuple] = field(default_factory=dict)
    smoke_centroids: dict[int, tuple] = field(default_factory=dict)
    shooter_bboxes: dict[int, tuple] = field(default_factory=dict)
    muzzle_points: dict[int, tuple] = field(default_factory=dict)

    def nearest_frame(self, table: dict, frame: int, tol: int):
        candidates = [f for f in table if abs(f - frame) <= tol]
        if not candidates:
            return None
        return table[min(candidates, key=lambda f: abs(f - frame))]


def evaluate_case(annotation: CaseAnnotation,
                  predictions: VideoPredictions,
                  frame_tolerance: int = 1,
                  smoke_iou_min: float = SMOKE_IOU_MIN,
                  shooter_iou_min: float = SHOOTER_IOU_MIN,
                  muzzle_radius_frac: float = MUZZLE_RADIUS_FRAC) -> list[CaseResult]:
    """Score every annotated event against the predictions for its frame.

    Smoke counts on box overlap or centroid containment; the muzzle can
    only succeed when both the smoke and the shooter did.
    """
    if not annotation.ground_truth:
        raise MissingGroundTruth(f"{annotation.video_id}: no annotated events")
    diag = float(np.hypot(annotation.frame_width, annotation.frame_height))
    results = []
    for idx, event in enumerate(annotation.ground_truth):
        details: dict = {}
        frame = event.frame_index

        smoke_bbox = predictions.nearest_frame(predictions.smoke_bboxes,
                                               frame, frame_tolerance)
        centroid = predictions.nearest_frame(predictions.smoke_centroids,
                                             frame, frame_tolerance)
        smoke_ok = False
        if smoke_bbox is not None:
            overlap = iou(smoke_bbox, event.smoke_bbox)
            details["smoke_iou"] = overlap
            smoke_ok = overlap >= smoke_iou_min
        if not smoke_ok and centroid is not None:
            gx0, gy0, gx1, gy1 = event.smoke_bbox
            smoke_ok = gx0 <= centroid[0] <= gx1 and gy0 <= centroid[1] <= gy1
            details["smoke_centroid_inside"] = smoke_ok

        shooter_bbox = predictions.nearest_frame(predictions.shooter_bboxes,
                                                 frame, frame_tolerance)
        shooter_ok = False
        if shooter_bbox is not None:
            overlap = iou(shooter_bbox, event.shooter_bbox)
            details["shooter_iou"] = overlap
            shooter_ok = overlap >= shooter_iou_min

        muzzle = predictions.nearest_frame(predictions.muzzle_points,
                                           frame, frame_tolerance)
        muzzle_ok = False
        if muzzle is not None:
            dist = float(np.hypot(muzzle[0] - event.muzzle_point[0],
                                  muzzle[1] - event.muzzle_point[1]))
            details["muzzle_distance_px"] = dist
            details["muzzle_radius_px"] = muzzle_radius_frac * diag
            muzzle_ok = dist <= muzzle_radius_frac * diag
        muzzle_ok = muzzle_ok and smoke_ok and shooter_ok

        results.append(CaseResult(video_id=annotation.video_id, event_index=idx,
                                  smoke_success=smoke_ok,
                                  shooter_success=shooter_ok,
                                  muzzle_success=muzzle_ok, details=details))
    return results


def summarize_report(results: list[CaseResult],
                     thresholds: dict | None = None) -> Report:
    if not results:
        raise EmptyResults("no case results to summarize")
    if thresholds is None:
        thresholds = {"smoke_iou_min": SMOKE_IOU_MIN,
                      "shooter_iou_min": SHOOTER_IOU_MIN,
                      "muzzle_radius_frac": MUZZLE_RADIUS_FRAC}
    return Report(
        denominator=len(results),
        smoke_successes=sum(r.smoke_success for r in results),
        shooter_successes=sum(r.shooter_success for r in results),
        muzzle_successes=sum(r.muzzle_success for r in results),
        thresholds=dict(thresholds),
    )


def format_report_text(report: Report) -> str:
    """Aligned text table with one-decimal percentages."""
    rates = report.rates_pct()
    widths = [max(len(c), 8) for c in REPORT_COLUMNS]
    thresh = ", ".join(f"{k}={v}" for k, v in sorted(report.thresholds.items()))
    lines = [
        f"events: {report.denominator}   criteria: {thresh}",
        " | ".join(c.ljust(w) for c, w in zip(REPORT_COLUMNS, widths)),
        "-+-".join("-" * w for w in widths),
        " | ".join(f"{r:.1f}%".ljust(w) for r, w in zip(rates, widths)),
    ]
    return "\n".join(lines)


def report_to_json(report: Report) -> dict:
    rates = report.rates_pct()
    return {
        "denominator": report.denominator,
        "columns": list(REPORT_COLUMNS),
        "successes": [report.smoke_successes, report.shooter_successes,
                      report.muzzle_successes],
        "rates_pct": list(rates),
        "thresholds": report.thresholds,
    }
