"""Match a shooter to each smoke cloud and place the muzzle between them."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.ndimage

from .errors import DegenerateGeometry, EmptyFile, SchemaError
from .flow import FlowField
from .smoke import SmokeBlob

log = logging.getLogger(__name__)

DETECTION_MIN_SCORE = 0.5
HEAD_HEIGHT_FRACTION = 0.15   # reference point sits this far below the box top
T_CLAMP = (0.5, 0.9)
MATCH_W_DIST = 0.6
MATCH_W_ORIENT = 0.4
MATCH_SCORE_FLOOR = 0.2
BASELINE_PROPOSAL_SCORE = 0.3


@dataclass(frozen=True)
class PersonBox:
    bbox: tuple[float, float, float, float]  # x0, y0, x1, y1
    score: float
    source: str  # "external" | "baseline"
    frame_index: int

    @property
    def center(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bbox
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


@dataclass(frozen=True)
class MuzzleEstimate:
    point: tuple[float, float]
    shooter_ref: PersonBox
    smoke_ref: SmokeBlob
    t: float           # interpolation parameter along shooter -> smoke
    confidence: float


@dataclass(frozen=True)
class ProposalConfig:
    tau_abs: float = 1.0
    aspect_min: float = 1.2   # height/width; people are taller than wide
    aspect_max: float = 5.0
    area_min_frac: float = 0.001
    area_max_frac: float = 0.25


def load_person_detections(path: str | Path,
                           frame_dims: tuple[int, int],
                           min_score: float = DETECTION_MIN_SCORE) -> list[PersonBox]:
    """Read {frame_index, class, score, bbox} records, clamp, and filter.

    Non-person classes and low-score entries are skipped; boxes degenerate
    after clamping are dropped (counted in a warning).
    """
    path = Path(path)
    width, height = frame_dims
    boxes = []
    n_degenerate = 0
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise EmptyFile(f"{path}: no detection records")
    for lineno, line in enumerate(lines):
        where = f"{path.name}:{lineno + 1}"
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(where, f"invalid JSON: {exc}") from exc
        if not isinstance(rec, dict):
            raise SchemaError(where, "record must be an object")
        for key in ("frame_index", "class", "score", "bbox"):
            if key not in rec:
                raise SchemaError(f"{where}.{key}", "missing field")
        if rec["class"] != "person":
            continue
        score = rec["score"]
        if not isinstance(score, (int, float)) or not 0.0 <= score <= 1.0:
            raise SchemaError(f"{where}.score", f"not a probability: {score!r}")
        if score < min_score:
            continue
        bbox = rec["bbox"]
        if (not isinstance(bbox, list) or len(bbox) != 4
                or not all(isinstance(c, (int, float)) for c in bbox)):
            raise SchemaError(f"{where}.bbox", "expected [x0, y0, x1, y1]")
        x0 = min(max(float(bbox[0]), 0.0), width)
        y0 = min(max(float(bbox[1]), 0.0), height)
        x1 = min(max(float(bbox[2]), 0.0), width)
        y1 = min(max(float(bbox[3]), 0.0), height)
        if x1 <= x0 or y1 <= y0:
            n_degenerate += 1
            continue
        boxes.append(PersonBox(bbox=(x0, y0, x1, y1), score=float(score),
                               source="external",
                               frame_index=int(rec["frame_index"])))
    if n_degenerate:
        log.warning("%s: dropped %d degenerate box(es) after clamping",
                    path.name, n_degenerate)
    return boxes


def baseline_person_proposals(field: FlowField,
                              cfg: ProposalConfig = ProposalConfig(),
                              frame_index: int = 0) -> list[PersonBox]:
    """Motion-blob fallback when no external person detections exist.

    Connected moving regions with person-plausible aspect and size become
    fixed low-score proposals.
    """
    mag = field.magnitude()
    mask = (mag > cfg.tau_abs) & field.valid
    labels, n_labels = scipy.ndimage.label(mask, structure=np.ones((3, 3)))
    h, w = mag.shape
    out = []
    for label in range(1, n_labels + 1):
        ys, xs = np.nonzero(labels == label)
        area = len(ys)
        if not cfg.area_min_frac * h * w <= area <= cfg.area_max_frac * h * w:
            continue
        bw = xs.max() - xs.min() + 1
        bh = ys.max() - ys.min() + 1
        if not cfg.aspect_min <= bh / bw <= cfg.aspect_max:
            continue
        out.append(PersonBox(
            bbox=(float(xs.min()), float(ys.min()),
                  float(xs.max() + 1), float(ys.max() + 1)),
            score=BASELINE_PROPOSAL_SCORE, source="baseline",
            frame_index=frame_index))
    out.sort(key=lambda b: (b.bbox[0], b.bbox[1]))
    return out


def match_score(smoke: SmokeBlob, box: PersonBox, diag: float,
                w_dist: float = MATCH_W_DIST,
                w_orient: float = MATCH_W_ORIENT) -> float:
    """Proximity plus direction consistency: smoke drifts away from the shooter."""
    cx, cy = box.center
    sx, sy = smoke.centroid
    dist = float(np.hypot(sx - cx, sy - cy))
    proximity = 1.0 / (1.0 + dist / diag)
    fu, fv = smoke.mean_flow
    fnorm = float(np.hypot(fu, fv))
    dnorm = float(np.hypot(sx - cx, sy - cy))
    if fnorm == 0.0 or dnorm == 0.0:
        cos_theta = 0.0
    else:
        cos_theta = (fu * (sx - cx) + fv * (sy - cy)) / (fnorm * dnorm)
    return w_dist * proximity + w_orient * max(0.0, cos_theta)


def match_shooter(smoke: SmokeBlob, people: list[PersonBox],
                  frame_dims: tuple[int, int],
                  score_floor: float = MATCH_SCORE_FLOOR) -> PersonBox | None:
    """Best-scoring person for a smoke blob, or None when nobody qualifies.

    Distances are normalized by the frame diagonal, so the choice is
    invariant to uniform rescaling of all coordinates.
    """
    if not people:
        log.info("shooter not detected: no person candidates for smoke at %s",
                 smoke.centroid)
        return None
    diag = float(np.hypot(*frame_dims))
    sx, sy = smoke.centroid

    def sort_key(box: PersonBox):
        score = match_score(smoke, box, diag)
        cx, cy = box.center
        return (-score, float(np.hypot(sx - cx, sy - cy)), box.bbox[0])

    best = min(people, key=sort_key)
    if match_score(smoke, best, diag) < score_floor:
        log.info("shooter not detected: all candidates below score floor")
        return None
    return best


def _box_exit_t(origin: tuple[float, float], target: tuple[float, float],
                bbox: tuple[float, float, float, float]) -> float:
    """Smallest t in (0, 1] where origin + t*(target-origin) leaves the box."""
    ox, oy = origin
    dx, dy = target[0] - origin[0], target[1] - origin[1]
    x0, y0, x1, y1 = bbox
    t_exit = 1.0
    for coord, delta, lo, hi in ((ox, dx, x0, x1), (oy, dy, y0, y1)):
        if delta > 0:
            t_exit = min(t_exit, (hi - coord) / delta)
        elif delta < 0:
            t_exit = min(t_exit, (lo - coord) / delta)
    return max(t_exit, 0.0)


def shooter_reference_point(shooter: PersonBox,
                            head_frac: float = HEAD_HEIGHT_FRACTION):
    """Upper-center of the box: a robust eye/head proxy."""
    x0, y0, x1, y1 = shooter.bbox
    return ((x0 + x1) / 2.0, y0 + head_frac * (y1 - y0))


def localize_muzzle(shooter: PersonBox, smoke: SmokeBlob,
                    t: float | None = None,
                    t_clamp: tuple[float, float] = T_CLAMP,
                    head_frac: float = HEAD_HEIGHT_FRACTION) -> MuzzleEstimate:
    """Place the muzzle on the segment from the shooter's head to the smoke.

    Without an explicit t, the first point past the shooter box along the
    segment is used, clamped to t_clamp so the estimate stays between the
    body and the cloud but nearer the cloud.
    """
    ref = shooter_reference_point(shooter, head_frac)
    cx, cy = smoke.centroid
    if ref == (cx, cy):
        raise DegenerateGeometry("shooter reference equals smoke centroid")
    if t is None:
        t = min(max(_box_exit_t(ref, (cx, cy), shooter.bbox), t_clamp[0]),
                t_clamp[1])
    if not 0.0 < t < 1.0:
        raise ValueError(f"t={t} must lie strictly inside (0, 1)")
    point = (ref[0] + t * (cx - ref[0]), ref[1] + t * (cy - ref[1]))
    return MuzzleEstimate(point=point, shooter_ref=shooter, smoke_ref=smoke,
                          t=float(t),
                          confidence=float(shooter.score * smoke.coherence))
