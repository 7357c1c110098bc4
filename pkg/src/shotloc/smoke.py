"""Gun-smoke candidates: compact coherent-motion blobs over a static background."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from .flow import FlowField

# continuous intensity -> 1..5 reporting scale, fixed bin edges
INTENSITY_SCALE_EDGES = (2.0, 4.0, 8.0, 16.0)


@dataclass(frozen=True)
class SmokeConfig:
    tau_abs: float = 1.0        # px; a pixel below this is background
    kappa: float = 4.0          # threshold multiple of background median
    area_min_frac: float = 0.0005
    area_max_frac: float = 0.05
    coherence_min: float = 0.6
    moving_max_frac: float = 0.35  # above this the frame is a camera pan
    intensity_floor: float = 0.1   # px; denominator floor for static scenes


@dataclass(frozen=True)
class SmokeBlob:
    centroid: tuple[float, float]       # (x, y), magnitude-weighted
    bbox: tuple[float, float, float, float]  # x0, y0, x1, y1 (exclusive)
    area: int
    mean_flow: tuple[float, float]
    coherence: float                    # 1 - circular variance of direction
    intensity: float                    # mean magnitude / background magnitude


@dataclass(frozen=True)
class StaticnessReport:
    background_median_mag: float
    moving_fraction: float


def flow_magnitude_stats(field: FlowField,
                         cfg: SmokeConfig = SmokeConfig()) -> StaticnessReport:
    """Median magnitude over valid pixels and the fraction moving above tau."""
    mag = field.magnitude()[field.valid]
    if mag.size == 0:
        return StaticnessReport(0.0, 0.0)
    return StaticnessReport(
        background_median_mag=float(np.median(mag)),
        moving_fraction=float(np.mean(mag > cfg.tau_abs)),
    )


def _coherence(u: np.ndarray, v: np.ndarray) -> float:
    angles = np.arctan2(v, u)
    resultant = np.hypot(np.cos(angles).mean(), np.sin(angles).mean())
    return float(min(resultant, 1.0))


def detect_smoke_blobs(field: FlowField,
                       cfg: SmokeConfig = SmokeConfig()) -> list[SmokeBlob]:
    """Threshold moving pixels, label 8-connected components, gate, and rank.

    A frame whose moving fraction exceeds the pan gate yields no blobs:
    global motion means the camera moved, not the scene.
    """
    stats = flow_magnitude_stats(field, cfg)
    if stats.moving_fraction > cfg.moving_max_frac:
        return []
    mag = field.magnitude()
    threshold = max(cfg.tau_abs, cfg.kappa * stats.background_median_mag)
    mask = (mag > threshold) & field.valid
    labels, n_labels = scipy.ndimage.label(mask, structure=np.ones((3, 3)))
    if n_labels == 0:
        return []

    h, w = mag.shape
    area_lo = cfg.area_min_frac * h * w
    area_hi = cfg.area_max_frac * h * w
    u64 = field.u.astype(np.float64)
    v64 = field.v.astype(np.float64)
    bg = max(stats.background_median_mag, cfg.intensity_floor)

    blobs = []
    for label in range(1, n_labels + 1):
        ys, xs = np.nonzero(labels == label)
        area = len(ys)
        if not area_lo <= area <= area_hi:
            continue
        bu, bv = u64[ys, xs], v64[ys, xs]
        coherence = _coherence(bu, bv)
        if coherence < cfg.coherence_min:
            continue
        weights = mag[ys, xs]
        total = weights.sum()
        centroid = (float((weights * xs).sum() / total),
                    float((weights * ys).sum() / total))
        blobs.append(SmokeBlob(
            centroid=centroid,
            bbox=(float(xs.min()), float(ys.min()),
                  float(xs.max() + 1), float(ys.max() + 1)),
            area=area,
            mean_flow=(float(bu.mean()), float(bv.mean())),
            coherence=coherence,
            intensity=float(weights.mean() / bg),
        ))
    blobs.sort(key=lambda b: (-b.intensity, b.centroid[1], b.centroid[0]))
    return blobs


def intensity_to_scale(intensity: float) -> int:
    """Map continuous blob intensity onto the 1..5 annotation scale."""
    scale = 1
    for edge in INTENSITY_SCALE_EDGES:
        if intensity >= edge:
            scale += 1
    return scale
