"""One configuration document covering every tunable default in the pipeline."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib


@dataclass
class PathsConfig:
    data_dir: str = "data"
    runs_dir: str = "runs"


@dataclass
class AudioConfig:
    window_s: float = 3.0
    stride_s: float = 1.0
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    n_mels: int = 26
    n_coeffs: int = 13
    preemphasis: float = 0.97
    log_floor: float = 1e-10
    codebook_k: int = 256
    kmeans_max_iter: int = 100
    seed: int = 0


@dataclass
class RerankConfig:
    lambda0: float | None = None  # default: 20th percentile of initial losses
    mu: float = 1.3
    max_rounds: int = 10
    pseudo_fraction: float = 0.2


@dataclass
class ScoringConfig:
    reg: float = 0.01
    sgd_steps: int = 2000
    seed: int = 0
    gate_confidence: float = 0.70
    model_path: str | None = None       # pre-trained model to load
    train_manifest: str | None = None   # JSONL of {path, label} training WAVs
    rerank: RerankConfig = field(default_factory=RerankConfig)


@dataclass
class FlowConfig:
    alpha: float = 15.0
    iterations: int = 100
    pyramid_levels: int = 4
    scale: float = 0.5
    frame_stride: int = 1
    default_fps: float = 25.0   # per-video meta.json overrides
    write_viz: bool = True


@dataclass
class SmokeDetectConfig:
    tau_abs: float = 1.0
    kappa: float = 4.0
    area_min_frac: float = 0.0005
    area_max_frac: float = 0.05
    coherence_min: float = 0.6
    moving_max_frac: float = 0.35
    intensity_floor: float = 0.1


@dataclass
class LocalizeConfig:
    detection_min_score: float = 0.5
    w_dist: float = 0.6
    w_orient: float = 0.4
    score_floor: float = 0.2
    t_lo: float = 0.5
    t_hi: float = 0.9
    head_frac: float = 0.15


@dataclass
class EvalConfig:
    smoke_iou_min: float = 0.3
    shooter_iou_min: float = 0.5
    muzzle_radius_frac: float = 0.02
    frame_tolerance: int = 1
    annotations_path: str | None = None  # default: <data_dir>/annotations.json


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8008


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    audio: AudioConfig = field(default_factory=AudioConfig)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    flow: FlowConfig = field(default_factory=FlowConfig)
    smoke: SmokeDetectConfig = field(default_factory=SmokeDetectConfig)
    localize: LocalizeConfig = field(default_factory=LocalizeConfig)
    evaluation: EvalConfig = field(default_factory=EvalConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)


def _from_dict(cls, doc: dict, path: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in doc.items():
        if key not in fields:
            raise ValueError(f"unknown config key {path}{key}")
        ftype = fields[key].type
        if isinstance(value, dict):
            nested = _NESTED.get((cls, key))
            if nested is None:
                raise ValueError(f"{path}{key} does not take a table")
            kwargs[key] = _from_dict(nested, value, f"{path}{key}.")
        else:
            kwargs[key] = value
        del ftype
    return cls(**kwargs)


_NESTED = {
    (PipelineConfig, "paths"): PathsConfig,
    (PipelineConfig, "audio"): AudioConfig,
    (PipelineConfig, "scoring"): ScoringConfig,
    (PipelineConfig, "flow"): FlowConfig,
    (PipelineConfig, "smoke"): SmokeDetectConfig,
    (PipelineConfig, "localize"): LocalizeConfig,
    (PipelineConfig, "evaluation"): EvalConfig,
    (PipelineConfig, "service"): ServiceConfig,
    (ScoringConfig, "rerank"): RerankConfig,
}


def config_from_dict(doc: dict) -> PipelineConfig:
    return _from_dict(PipelineConfig, doc, "")


def config_to_dict(config: PipelineConfig) -> dict:
    return dataclasses.asdict(config)


def load_config(path: str | Path) -> PipelineConfig:
    """Read a TOML or JSON config document; extension picks the parser."""
    path = Path(path)
    if path.suffix == ".toml":
        doc = tomllib.loads(path.read_text())
    else:
        doc = json.loads(path.read_text())
    return config_from_dict(doc)


def save_config(config: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2) + "\n")
