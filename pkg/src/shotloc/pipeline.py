"""Stage orchestration: resumable runs from audio ranking to the report."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import audio as audio_mod
from . import features as feat_mod
from . import scoring as scoring_mod
from .config import PipelineConfig, config_to_dict
from .errors import MissingInput, StageFailed
from .evaluation import (VideoPredictions, evaluate_case, format_report_text,
                         load_annotations, parse_annotation, report_to_json,
                         summarize_report)
from .flow import FlowParams, compute_flow
from .floio import read_flo, write_flo
from .flowviz import flow_to_color
from .frames import list_frame_files, read_pnm, write_ppm
from .localize import (PersonBox, baseline_person_proposals,
                       load_person_detections, localize_muzzle, match_shooter)
from .manifest import STAGES, RunManifest, load_manifest, save_manifest
from .overlay import render_overlay
from .scoring import SegmentScore, SprParams
from .smoke import SmokeConfig, detect_smoke_blobs, flow_magnitude_stats, intensity_to_scale
from .verdicts import AnnotationStore, VerdictStore

log = logging.getLogger(__name__)


def read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text().splitlines()
            if line.strip()]


def write_jsonl(path: Path, records) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    tmp.replace(path)


def score_record(score: SegmentScore) -> dict:
    seg = score.segment_ref
    return {"source_id": seg.source_id, "start": seg.start,
            "duration": seg.duration, "margin": score.margin,
            "confidence": score.confidence, "rank": score.rank,
            "stage": score.stage}


def record_segment(rec: dict) -> audio_mod.Segment:
    return audio_mod.Segment(source_id=rec["source_id"], start=rec["start"],
                             duration=rec["duration"], sample_span=(0, 0))


def segment_key(rec: dict) -> str:
    return f"{rec['source_id']}:{round(rec['start'] * 1000)}"


class Pipeline:
    """One run directory plus the stage implementations that fill it."""

    def __init__(self, config: PipelineConfig, run_id: str | None = None,
                 no_review: bool = False, threads: int = 1):
        self.config = config
        self.no_review = no_review
        self.threads = max(1, threads)
        self.data_dir = Path(config.paths.data_dir)
        self.run_id = run_id or time.strftime("run-%Y%m%d-%H%M%S")
        self.run_dir = Path(config.paths.runs_dir) / self.run_id
        self.run_dir.mkdir(parents=True, exist_ok=True)
        existing = load_manifest(self.run_dir)
        self.manifest = existing or RunManifest(
            run_id=self.run_id, config=config_to_dict(config))

    # --- shared lookups ---

    def videos(self) -> list[str]:
        if not self.data_dir.is_dir():
            raise MissingInput(f"data directory {self.data_dir} does not exist")
        return sorted(p.name for p in self.data_dir.iterdir()
                      if (p / "audio.wav").exists())

    def video_fps(self, video_id: str) -> float:
        meta = self.data_dir / video_id / "meta.json"
        if meta.exists():
            return float(json.loads(meta.read_text()).get(
                "fps", self.config.flow.default_fps))
        return self.config.flow.default_fps

    def frame_files(self, video_id: str) -> dict[int, Path]:
        frames_dir = self.data_dir / video_id / "frames"
        if not frames_dir.is_dir():
            return {}
        return dict(list_frame_files(frames_dir))

    def frame_dims(self, video_id: str) -> tuple[int, int]:
        files = self.frame_files(video_id)
        if not files:
            raise MissingInput(f"no frames for video {video_id}")
        first = read_pnm(files[min(files)])
        return (first.width, first.height)

    def smoke_config(self) -> SmokeConfig:
        c = self.config.smoke
        return SmokeConfig(tau_abs=c.tau_abs, kappa=c.kappa,
                           area_min_frac=c.area_min_frac,
                           area_max_frac=c.area_max_frac,
                           coherence_min=c.coherence_min,
                           moving_max_frac=c.moving_max_frac,
                           intensity_floor=c.intensity_floor)

    def verdict_store(self) -> VerdictStore:
        return VerdictStore(self.run_dir / "verdicts.jsonl")

    def annotation_store(self) -> AnnotationStore:
        return AnnotationStore(self.run_dir / "annotations.jsonl")

    # --- per-stage feature helpers ---

    def _video_signal(self, video_id: str) -> audio_mod.PcmSignal:
        # segments must carry the video id, not the WAV file stem
        signal = audio_mod.read_wav(self.data_dir / video_id / "audio.wav")
        return audio_mod.PcmSignal(samples=signal.samples,
                                   sample_rate=signal.sample_rate,
                                   source_id=video_id)

    def _mfcc_frames(self, signal: audio_mod.PcmSignal):
        a = self.config.audio
        return feat_mod.compute_mfcc(signal, frame_ms=a.frame_ms,
                                     hop_ms=a.hop_ms, n_mels=a.n_mels,
                                     n_coeffs=a.n_coeffs,
                                     preemphasis=a.preemphasis,
                                     log_floor=a.log_floor)

    def _segment_bows(self, signal: audio_mod.PcmSignal, codebook):
        a = self.config.audio
        out = []
        for segment in audio_mod.segment_windows(signal, a.window_s, a.stride_s):
            clip = audio_mod.extract_segment(signal, segment)
            frames = self._mfcc_frames(clip)
            bow = feat_mod.encode_bow(frames, codebook, segment.segment_id)
            out.append((segment, bow))
        return out

    def _load_training_wavs(self):
        manifest_path = Path(self.config.scoring.train_manifest)
        if not manifest_path.exists():
            raise MissingInput(f"train manifest {manifest_path} does not exist")
        entries = read_jsonl(manifest_path)
        if not entries:
            raise MissingInput(f"train manifest {manifest_path} is empty")
        base = manifest_path.parent
        out = []
        for entry in entries:
            wav_path = Path(entry["path"])
            if not wav_path.is_absolute():
                wav_path = base / wav_path
            out.append((audio_mod.read_wav(wav_path), int(entry["label"])))
        return out

    def _resolve_codebook(self):
        a = self.config.audio
        if self.config.scoring.model_path:
            _, doc = scoring_mod.load_model(self.config.scoring.model_path)
            payload = doc.get("codebook")
            if payload is None:
                raise MissingInput("model file carries no codebook")
            return feat_mod.Codebook(
                centroids=np.asarray(payload["centroids"], dtype=np.float64),
                k=int(payload["k"]),
                training_seed=int(payload.get("seed", 0)))
        if self.config.scoring.train_manifest:
            frames = []
            for signal, _ in self._load_training_wavs():
                frames.extend(self._mfcc_frames(signal))
        else:  # unsupervised fallback: quantize the test corpus itself
            frames = []
            for video_id in self.videos():
                frames.extend(self._mfcc_frames(self._video_signal(video_id)))
        return feat_mod.build_codebook(frames, k=a.codebook_k, seed=a.seed,
                                       max_iter=a.kmeans_max_iter)

    # --- stages ---

    def stage_audio(self) -> None:
        codebook = self._resolve_codebook()
        (self.run_dir / "codebook.json").write_text(json.dumps({
            "k": codebook.k, "seed": codebook.training_seed,
            "centroids": codebook.centroids.tolist()}))

        records = []
        for video_id in self.videos():
            signal = self._video_signal(video_id)
            for segment, bow in self._segment_bows(signal, codebook):
                records.append({"source_id": segment.source_id,
                                "start": segment.start,
                                "duration": segment.duration,
                                "histogram": bow.histogram.tolist()})
        if not records:
            raise MissingInput(f"no scoreable audio under {self.data_dir}")
        write_jsonl(self.run_dir / "features.jsonl", records)

        if self.config.scoring.train_manifest:
            train_records = []
            for signal, label in self._load_training_wavs():
                for segment, bow in self._segment_bows(signal, codebook):
                    train_records.append({"source_id": signal.source_id,
                                          "start": segment.start,
                                          "label": label,
                                          "histogram": bow.histogram.tolist()})
            write_jsonl(self.run_dir / "train_features.jsonl", train_records)

    def _codebook_payload(self) -> dict:
        return json.loads((self.run_dir / "codebook.json").read_text())

    def stage_score(self) -> None:
        s = self.config.scoring
        if s.model_path:
            model, doc = scoring_mod.load_model(s.model_path)
        else:
            train = read_jsonl(self.run_dir / "train_features.jsonl")
            if not train:
                raise MissingInput(
                    "no pre-trained model and no training features; set "
                    "scoring.model_path or scoring.train_manifest")
            X = np.array([r["histogram"] for r in train])
            y = np.array([r["label"] for r in train])
            model = scoring_mod.train_linear_svm(X, y, reg=s.reg,
                                                 steps=s.sgd_steps, seed=s.seed)
        a = self.config.audio
        scoring_mod.save_model(
            self.run_dir / "model.json", model,
            codebook_payload=self._codebook_payload(),
            mfcc_params={"frame_ms": a.frame_ms, "hop_ms": a.hop_ms,
                         "n_mels": a.n_mels, "n_coeffs": a.n_coeffs})

        feats = read_jsonl(self.run_dir / "features.jsonl")
        segments = [record_segment(r) for r in feats]
        X = np.array([r["histogram"] for r in feats])
        scores = scoring_mod.score_segments(model, X, segments)
        write_jsonl(self.run_dir / "scores_initial.jsonl",
                    [score_record(sc) for sc in scores])

    def stage_rerank(self) -> None:
        s = self.config.scoring
        feats = read_jsonl(self.run_dir / "features.jsonl")
        hist_by_segment = {segment_key(r): r["histogram"] for r in feats}
        score_recs = read_jsonl(self.run_dir / "scores_initial.jsonl")
        if not score_recs:
            raise MissingInput("scores_initial.jsonl is empty")
        scores = [
            SegmentScore(segment_ref=record_segment(r), margin=r["margin"],
                         confidence=r["confidence"], rank=r["rank"],
                         stage=r["stage"])
            for r in sorted(score_recs, key=lambda r: r["rank"])
        ]
        X = np.array([hist_by_segment[segment_key(score_record(sc))]
                      for sc in scores])
        params = SprParams(lambda0=s.rerank.lambda0, mu=s.rerank.mu,
                           max_rounds=s.rerank.max_rounds,
                           pseudo_fraction=s.rerank.pseudo_fraction,
                           reg=s.reg, seed=s.seed)
        reranked = scoring_mod.spr_rerank(scores, X, params)
        write_jsonl(self.run_dir / "scores_reranked.jsonl",
                    [score_record(sc) for sc in reranked])

    def stage_threshold(self) -> None:
        recs = read_jsonl(self.run_dir / "scores_reranked.jsonl")
        tau = self.config.scoring.gate_confidence
        gated = [r for r in recs if r["confidence"] > tau]
        write_jsonl(self.run_dir / "gated.jsonl", gated)

    def gated_segments(self) -> list[dict]:
        return read_jsonl(self.run_dir / "gated.jsonl")

    def review_complete(self) -> bool:
        verdicts = self.verdict_store().live()
        return all(segment_key(rec) in verdicts for rec in self.gated_segments())

    def stage_review(self) -> str | None:
        if self.no_review:
            return "skipped: --no-review"
        if not self.review_complete():
            raise MissingInput(
                "verdicts: unreviewed gated segments remain; run `serve` and "
                "triage them, or pass --no-review")
        return None

    def confirmed_segments(self) -> list[dict]:
        gated = self.gated_segments()
        if self.no_review or not (self.run_dir / "verdicts.jsonl").exists():
            return gated
        verdicts = self.verdict_store().live()
        out = []
        for rec in gated:
            verdict = verdicts.get(segment_key(rec))
            if verdict is None or verdict.visible_gunshot:
                out.append(rec)
        return out

    def _flow_params(self) -> FlowParams:
        f = self.config.flow
        return FlowParams(alpha=f.alpha, iterations=f.iterations,
                          pyramid_levels=f.pyramid_levels, scale=f.scale)

    def flow_pairs_for(self, rec: dict) -> list[int]:
        fps = self.video_fps(rec["source_id"])
        stride = self.config.flow.frame_stride
        first = int(round(rec["start"] * fps))
        last = int(round((rec["start"] + rec["duration"]) * fps))
        return list(range(first, last - stride + 1, stride))

    def stage_flow(self) -> None:
        stride = self.config.flow.frame_stride
        params = self._flow_params()
        wanted: dict[str, set[int]] = {}
        for rec in self.confirmed_segments():
            wanted.setdefault(rec["source_id"], set()).update(
                self.flow_pairs_for(rec))

        jobs = []
        for video_id, starts in sorted(wanted.items()):
            files = self.frame_files(video_id)
            if not files:
                raise MissingInput(f"no frames directory for video {video_id}")
            out_dir = self.run_dir / "flow" / video_id
            out_dir.mkdir(parents=True, exist_ok=True)
            skipped = 0
            for f in sorted(starts):
                if f not in files or f + stride not in files:
                    skipped += 1
                    continue
                flo_path = out_dir / f"{f:06d}.flo"
                if flo_path.exists():
                    continue  # already computed by an earlier run
                jobs.append((files[f], files[f + stride], flo_path))
            if skipped:
                log.warning("%s: %d flow pair(s) missing frame files",
                            video_id, skipped)

        def compute(job):
            src, dst, flo_path = job
            field = compute_flow(read_pnm(src), read_pnm(dst), params)
            write_flo(field, flo_path)
            if self.config.flow.write_viz:
                viz_path = Path(str(flo_path).replace("/flow/", "/flow_viz/")
                                ).with_suffix(".ppm")
                viz_path.parent.mkdir(parents=True, exist_ok=True)
                write_ppm(viz_path, flow_to_color(field).rgb)

        if self.threads > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                list(pool.map(compute, jobs))
        else:
            for job in jobs:
                compute(job)

    def flow_files(self) -> list[tuple[str, int, Path]]:
        flow_dir = self.run_dir / "flow"
        out = []
        if flow_dir.is_dir():
            for video_dir in sorted(flow_dir.iterdir()):
                for path in sorted(video_dir.glob("*.flo")):
                    out.append((video_dir.name, int(path.stem), path))
        return out

    def stage_smoke(self) -> None:
        cfg = self.smoke_config()
        records = []
        for video_id, frame_index, path in self.flow_files():
            for blob in detect_smoke_blobs(read_flo(path), cfg):
                records.append({
                    "video_id": video_id, "frame_index": frame_index,
                    "centroid": list(blob.centroid), "bbox": list(blob.bbox),
                    "area": blob.area, "mean_flow": list(blob.mean_flow),
                    "coherence": blob.coherence, "intensity": blob.intensity,
                    "intensity_scale": intensity_to_scale(blob.intensity)})
        write_jsonl(self.run_dir / "smoke.jsonl", records)

    def _people_for(self, video_id: str, frame_index: int,
                    dims: tuple[int, int],
                    flo_by_frame: dict[int, Path]) -> list[PersonBox]:
        det_path = self.data_dir / video_id / "detections.jsonl"
        if det_path.exists():
            boxes = load_person_detections(
                det_path, dims,
                min_score=self.config.localize.detection_min_score)
            return [b for b in boxes if b.frame_index == frame_index]
        flo = flo_by_frame.get(frame_index)
        if flo is None:
            return []
        return baseline_person_proposals(read_flo(flo), frame_index=frame_index)

    def stage_localize(self) -> None:
        from .smoke import SmokeBlob
        loc_cfg = self.config.localize
        blob_recs = read_jsonl(self.run_dir / "smoke.jsonl")
        flo_index: dict[str, dict[int, Path]] = {}
        for video_id, frame_index, path in self.flow_files():
            flo_index.setdefault(video_id, {})[frame_index] = path

        records = []
        for rec in blob_recs:
            video_id = rec["video_id"]
            frame_index = rec["frame_index"]
            dims = self.frame_dims(video_id)
            blob = SmokeBlob(centroid=tuple(rec["centroid"]),
                             bbox=tuple(rec["bbox"]), area=rec["area"],
                             mean_flow=tuple(rec["mean_flow"]),
                             coherence=rec["coherence"],
                             intensity=rec["intensity"])
            people = self._people_for(video_id, frame_index, dims,
                                      flo_index.get(video_id, {}))
            shooter = match_shooter(blob, people, dims,
                                    score_floor=loc_cfg.score_floor)
            if shooter is None:
                records.append({"video_id": video_id,
                                "frame_index": frame_index,
                                "muzzle": None, "t": None, "confidence": None,
                                "shooter_bbox": None,
                                "smoke_bbox": list(blob.bbox),
                                "diagnostic": "shooter not detected"})
                continue
            estimate = localize_muzzle(
                shooter, blob, t_clamp=(loc_cfg.t_lo, loc_cfg.t_hi),
                head_frac=loc_cfg.head_frac)
            records.append({"video_id": video_id, "frame_index": frame_index,
                            "muzzle": list(estimate.point), "t": estimate.t,
                            "confidence": estimate.confidence,
                            "shooter_bbox": list(shooter.bbox),
                            "smoke_bbox": list(blob.bbox)})
            self._write_overlay(video_id, frame_index, people, blob, estimate,
                                flo_index)
        write_jsonl(self.run_dir / "localize.jsonl", records)

    def _write_overlay(self, video_id, frame_index, people, blob, estimate,
                       flo_index) -> None:
        files = self.frame_files(video_id)
        flo = flo_index.get(video_id, {}).get(frame_index)
        if frame_index not in files or flo is None:
            return
        frame = read_pnm(files[frame_index])
        field = read_flo(flo)
        cfg = self.smoke_config()
        stats = flow_magnitude_stats(field, cfg)
        threshold = max(cfg.tau_abs, cfg.kappa * stats.background_median_mag)
        mask = field.magnitude() > threshold
        out = render_overlay(frame, flow_to_color(field), mask, people, [blob],
                             estimate)
        path = self.run_dir / "overlays" / video_id / f"{frame_index:06d}.ppm"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_ppm(path, out.rgb)

    def _collect_annotations(self):
        e = self.config.evaluation
        path = Path(e.annotations_path) if e.annotations_path \
            else self.data_dir / "annotations.json"
        cases = list(load_annotations(path)) if path.exists() else []
        for rec in self.annotation_store().live().values():
            doc = dict(rec.get("attributes", {}))
            dims = self.frame_dims(rec["video_id"])
            doc.update({
                "video_id": rec["video_id"],
                "frame_width": dims[0], "frame_height": dims[1],
                "ground_truth": [{
                    "frame_index": rec["frame_index"],
                    "smoke_bbox": rec["smoke_bbox"],
                    "shooter_bbox": rec["shooter_bbox"],
                    "muzzle_point": rec["muzzle_point"],
                }],
            })
            cases.append(parse_annotation(doc, f"$review[{rec['segment_ref']}]"))
        return cases

    def stage_eval(self) -> None:
        e = self.config.evaluation
        cases = self._collect_annotations()
        if not cases:
            raise MissingInput("annotations: nothing to evaluate against")

        smoke_recs = read_jsonl(self.run_dir / "smoke.jsonl")
        loc_recs = read_jsonl(self.run_dir / "localize.jsonl")
        preds: dict[str, VideoPredictions] = {}

        def for_video(video_id: str) -> VideoPredictions:
            return preds.setdefault(video_id, VideoPredictions())

        for rec in smoke_recs:  # records are intensity-sorted per frame
            p = for_video(rec["video_id"])
            p.smoke_bboxes.setdefault(rec["frame_index"], tuple(rec["bbox"]))
            p.smoke_centroids.setdefault(rec["frame_index"],
                                         tuple(rec["centroid"]))
        best_conf: dict[tuple[str, int], float] = {}
        for rec in loc_recs:
            if rec["muzzle"] is None:
                continue
            key = (rec["video_id"], rec["frame_index"])
            if best_conf.get(key, -1.0) >= rec["confidence"]:
                continue
            best_conf[key] = rec["confidence"]
            p = for_video(rec["video_id"])
            p.shooter_bboxes[rec["frame_index"]] = tuple(rec["shooter_bbox"])
            p.muzzle_points[rec["frame_index"]] = tuple(rec["muzzle"])

        results = []
        for case in cases:
            results.extend(evaluate_case(
                case, preds.get(case.video_id, VideoPredictions()),
                frame_tolerance=e.frame_tolerance,
                smoke_iou_min=e.smoke_iou_min,
                shooter_iou_min=e.shooter_iou_min,
                muzzle_radius_frac=e.muzzle_radius_frac))
        write_jsonl(self.run_dir / "results.jsonl", [
            {"video_id": r.video_id, "event_index": r.event_index,
             "smoke_success": r.smoke_success,
             "shooter_success": r.shooter_success,
             "muzzle_success": r.muzzle_success, "details": r.details}
            for r in results])
        report = summarize_report(results, thresholds={
            "smoke_iou_min": e.smoke_iou_min,
            "shooter_iou_min": e.shooter_iou_min,
            "muzzle_radius_frac": e.muzzle_radius_frac})
        (self.run_dir / "report.json").write_text(
            json.dumps(report_to_json(report), indent=2) + "\n")
        (self.run_dir / "report.txt").write_text(
            format_report_text(report) + "\n")

    # --- orchestration ---

    _STAGE_FNS = {
        "audio": stage_audio, "score": stage_score, "rerank": stage_rerank,
        "threshold": stage_threshold, "review": stage_review,
        "flow": stage_flow, "smoke": stage_smoke, "localize": stage_localize,
        "eval": stage_eval,
    }

    def _check_dependencies(self, stage: str) -> None:
        for dep in STAGES[:STAGES.index(stage)]:
            if self.manifest.is_done(dep):
                continue
            if dep == "review":
                if self.no_review:
                    self.manifest.mark_done("review", note="skipped: --no-review")
                    save_manifest(self.manifest, self.run_dir)
                    continue
                if self.review_complete():
                    self.manifest.mark_done("review")
                    save_manifest(self.manifest, self.run_dir)
                    continue
                raise MissingInput(
                    "verdicts: review stage incomplete; triage the gated "
                    "segments via `serve` or pass --no-review")
            raise MissingInput(f"stage '{dep}' has not run yet "
                               f"(needed before '{stage}')")

    def run(self, stages: list[str] | None = None) -> RunManifest:
        requested = list(STAGES) if not stages else list(stages)
        unknown = [s for s in requested if s not in STAGES]
        if unknown:
            raise ValueError(f"unknown stage(s): {unknown}; "
                             f"valid: {', '.join(STAGES)}")
        for stage in STAGES:
            if stage not in requested:
                continue
            if self.manifest.is_done(stage):
                continue  # resumable: completed work is never redone
            self._check_dependencies(stage)
            try:
                note = self._STAGE_FNS[stage](self)
            except MissingInput:
                raise
            except Exception as exc:
                self.manifest.mark_failed(stage, str(exc))
                save_manifest(self.manifest, self.run_dir)
                raise StageFailed(stage, exc) from exc
            self.manifest.mark_done(stage, note=note if isinstance(note, str)
                                    else None)
            self.manifest.artifacts.update(self._stage_artifacts(stage))
            save_manifest(self.manifest, self.run_dir)
        return self.manifest

    def _stage_artifacts(self, stage: str) -> dict[str, str]:
        names = {
            "audio": ["features.jsonl", "codebook.json"],
            "score": ["model.json", "scores_initial.jsonl"],
            "rerank": ["scores_reranked.jsonl"],
            "threshold": ["gated.jsonl"],
            "review": ["verdicts.jsonl"],
            "flow": ["flow"],
            "smoke": ["smoke.jsonl"],
            "localize": ["localize.jsonl", "overlays"],
            "eval": ["results.jsonl", "report.json", "report.txt"],
        }
        out = {}
        for name in names.get(stage, []):
            path = self.run_dir / name
            if path.exists():
                out[name] = str(path)
        return out


def run_pipeline(config: PipelineConfig, stages: list[str] | None = None,
                 run_id: str | None = None, no_review: bool = False,
                 threads: int = 1) -> RunManifest:
    """Execute the requested stages in dependency order, resuming past work."""
    return Pipeline(config, run_id=run_id, no_review=no_review,
                    threads=threads).run(stages)
