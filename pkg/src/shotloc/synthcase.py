"""Deterministic synthetic mini-case: frames, audio, detections, annotations.

One 15 s video at 5 fps with a textured static scene, a standing shooter,
and a drifting smoke puff synchronized with a gunshot-like audio burst.
Used by the end-to-end tests and the demo scripts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.ndimage

from .audio import write_wav
from .config import (AudioConfig, EvalConfig, FlowConfig, PathsConfig,
                     PipelineConfig, RerankConfig, ScoringConfig, save_config)
from .frames import write_ppm
from .localize import shooter_reference_point, PersonBox

SAMPLE_RATE = 16000
FPS = 5.0
FRAME_W, FRAME_H = 240, 180
VIDEO_SECONDS = 15.0
SHOOTER_BBOX = (60.0, 70.0, 85.0, 150.0)
SMOKE_RADIUS = 10.0
SMOKE_CENTER_AT_EVENT = (130.0, 78.0)
SMOKE_SPEED_PX = 4.0          # per frame, rightward
EVENT_FRAME = 8               # t = 1.6 s
SMOKE_FIRST, SMOKE_LAST = 5, 14
BURST_TIMES = (1.5, 5.5)      # only the first has visible smoke


@dataclass(frozen=True)
class SynthCase:
    root: Path
    data_dir: Path
    config_path: Path
    video_id: str
    event_frame: int
    muzzle_point: tuple[float, float]


def _background(rng) -> np.ndarray:
    noise = scipy.ndimage.gaussian_filter(rng.random((FRAME_H, FRAME_W)), 2.0)
    noise = (noise - noise.min()) / (noise.max() - noise.min())
    return (60 + 120 * noise).astype(np.uint8)


def _shooter_texture(rng) -> np.ndarray:
    x0, y0, x1, y1 = (int(c) for c in SHOOTER_BBOX)
    tex = (20 + 40 * rng.random((y1 - y0, x1 - x0))).astype(np.uint8)
    return tex


def smoke_center(frame_index: int) -> tuple[float, float]:
    return (SMOKE_CENTER_AT_EVENT[0] + SMOKE_SPEED_PX * (frame_index - EVENT_FRAME),
            SMOKE_CENTER_AT_EVENT[1])


def _render_frame(frame_index: int, background, shooter_tex, speckle) -> np.ndarray:
    img = background.copy()
    x0, y0, x1, y1 = (int(c) for c in SHOOTER_BBOX)
    img[y0:y1, x0:x1] = shooter_tex
    if SMOKE_FIRST <= frame_index <= SMOKE_LAST:
        cx, cy = smoke_center(frame_index)
        yy, xx = np.mgrid[0:FRAME_H, 0:FRAME_W]
        inside = (xx - cx) ** 2 + (yy - cy) ** 2 <= SMOKE_RADIUS ** 2
        # the puff carries its own texture so flow inside it is well posed
        shift = int(round(SMOKE_SPEED_PX * (frame_index - EVENT_FRAME)))
        moving = np.roll(speckle, shift, axis=1)
        img[inside] = moving[inside]
    rgb = np.repeat(img[..., None], 3, axis=2)
    return rgb


def _burst_waveform(seed: int) -> np.ndarray:
    # long enough that burst frames dominate the window's codeword mass
    length = int(0.6 * SAMPLE_RATE)
    envelope = np.exp(-np.linspace(0.0, 4.0, length))
    noise = np.random.default_rng(seed ^ 0x5EED).standard_normal(length)
    return 0.7 * envelope * noise


def _audio_track(rng, seconds: float, bursts, burst_wave) -> np.ndarray:
    n = int(round(seconds * SAMPLE_RATE))
    t = np.arange(n) / SAMPLE_RATE
    signal = 0.01 * rng.standard_normal(n) + 0.03 * np.sin(2 * np.pi * 220 * t)
    for burst_at in bursts:
        # bursts land on the 10 ms hop grid: every shot shares one waveform,
        # so its MFCC frames are identical wherever it occurs
        start = int(round(burst_at * 100)) * (SAMPLE_RATE // 100)
        signal[start:start + len(burst_wave)] += burst_wave
    return np.clip(signal, -1.0, 1.0)


def expected_muzzle_point() -> tuple[float, float]:
    """Where a correct pipeline puts the muzzle for the synthetic geometry."""
    shooter = PersonBox(bbox=SHOOTER_BBOX, score=0.95, source="external",
                        frame_index=EVENT_FRAME)
    ref = shooter_reference_point(shooter)
    cx, cy = SMOKE_CENTER_AT_EVENT
    t = 0.5  # the box exit parameter is below the clamp for this layout
    return (ref[0] + t * (cx - ref[0]), ref[1] + t * (cy - ref[1]))


def build_case(root: str | Path, seed: int = 0) -> SynthCase:
    root = Path(root)
    rng = np.random.default_rng(seed)
    video_id = "case01"
    data_dir = root / "data"
    video_dir = data_dir / video_id
    frames_dir = video_dir / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)

    background = _background(rng)
    shooter_tex = _shooter_texture(rng)
    speckle = (150 + 100 * rng.random((FRAME_H, FRAME_W))).astype(np.uint8)
    n_frames = int(round(VIDEO_SECONDS * FPS)) + 1
    for f in range(n_frames):
        write_ppm(frames_dir / f"{f:06d}.ppm",
                  _render_frame(f, background, shooter_tex, speckle))
    (video_dir / "meta.json").write_text(json.dumps({"fps": FPS}))

    burst_wave = _burst_waveform(seed)
    write_wav(video_dir / "audio.wav",
              _audio_track(rng, VIDEO_SECONDS, BURST_TIMES, burst_wave),
              SAMPLE_RATE)

    with open(video_dir / "detections.jsonl", "w") as fh:
        for f in range(n_frames):
            fh.write(json.dumps({"frame_index": f, "class": "person",
                                 "score": 0.95,
                                 "bbox": list(SHOOTER_BBOX)}) + "\n")

    muzzle = expected_muzzle_point()
    cx, cy = SMOKE_CENTER_AT_EVENT
    annotation = {
        "video_id": video_id,
        "frame_width": FRAME_W, "frame_height": FRAME_H,
        "smoke_color": "grey", "smoke_intensity": 4,
        "background_color": "grey", "resolution_class": "medium",
        "camera_far": False, "gun_stable": True, "shooter_moves": False,
        "camera_moves": False, "gun_position": "sideways",
        "obstruction": "nothing", "pose": "standing",
        "ground_truth": [{
            "frame_index": EVENT_FRAME,
            "smoke_bbox": [cx - SMOKE_RADIUS, cy - SMOKE_RADIUS,
                           cx + SMOKE_RADIUS, cy + SMOKE_RADIUS],
            "shooter_bbox": list(SHOOTER_BBOX),
            "muzzle_point": list(muzzle),
        }],
    }
    (data_dir / "annotations.json").write_text(json.dumps([annotation], indent=2))

    train_dir = root / "train"
    train_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(5):
        # the whole burst stays inside both 3 s windows of a 4 s track
        burst_at = float(rng.uniform(1.3, 2.3))
        write_wav(train_dir / f"pos{i}.wav",
                  _audio_track(rng, 4.0, [burst_at], burst_wave), SAMPLE_RATE)
        entries.append({"path": f"pos{i}.wav", "label": 1})
    for i in range(5):
        write_wav(train_dir / f"neg{i}.wav",
                  _audio_track(rng, 4.0, [], burst_wave), SAMPLE_RATE)
        entries.append({"path": f"neg{i}.wav", "label": -1})
    with open(train_dir / "train_manifest.jsonl", "w") as fh:
        for entry in entries:
            fh.write(json.dumps(entry) + "\n")

    config = PipelineConfig(
        paths=PathsConfig(data_dir=str(data_dir), runs_dir=str(root / "runs")),
        audio=AudioConfig(codebook_k=64, seed=seed),
        scoring=ScoringConfig(
            sgd_steps=800, seed=seed,
            train_manifest=str(train_dir / "train_manifest.jsonl"),
            # 13 test segments: a 0.4 fraction pseudo-labels 5 each way,
            # anchoring every true positive and keeping calibrated
            # confidences well clear of the gate
            rerank=RerankConfig(pseudo_fraction=0.4)),
        flow=FlowConfig(iterations=60, pyramid_levels=3, default_fps=FPS),
        evaluation=EvalConfig(
            annotations_path=str(data_dir / "annotations.json")),
    )
    config_path = root / "config.json"
    save_config(config, config_path)
    return SynthCase(root=root, data_dir=data_dir, config_path=config_path,
                     video_id=video_id, event_frame=EVENT_FRAME,
                     muzzle_point=muzzle)
