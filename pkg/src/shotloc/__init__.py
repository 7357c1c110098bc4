"""Gunshot source localization from audio ranking and optical-flow smoke cues."""

from .audio import PcmSignal, Segment, read_wav, segment_windows, extract_segment
from .features import (BowVector, Codebook, MfccFrame, build_codebook,
                       compute_mfcc, encode_bow)
from .flow import FlowField, FlowParams, compute_flow
from .floio import read_flo, write_flo
from .flowviz import flow_to_color
from .frames import Frame, read_pnm, write_ppm, write_pgm
from .localize import (MuzzleEstimate, PersonBox, baseline_person_proposals,
                       load_person_detections, localize_muzzle, match_shooter)
from .overlay import render_overlay
from .scoring import (SegmentScore, SprParams, SvmModel, score_segments,
                      spr_rerank, threshold_filter, train_linear_svm)
from .smoke import (SmokeBlob, SmokeConfig, StaticnessReport,
                    detect_smoke_blobs, flow_magnitude_stats)
from .evaluation import (CaseAnnotation, CaseResult, Report, evaluate_case,
                         load_annotations, summarize_report)

__version__ = "0.1.0"

__all__ = [
    "PcmSignal", "Segment", "read_wav", "segment_windows", "extract_segment",
    "BowVector", "Codebook", "MfccFrame", "build_codebook", "compute_mfcc",
    "encode_bow",
    "FlowField", "FlowParams", "compute_flow", "read_flo", "write_flo",
    "flow_to_color", "Frame", "read_pnm", "write_ppm", "write_pgm",
    "MuzzleEstimate", "PersonBox", "baseline_person_proposals",
    "load_person_detections", "localize_muzzle", "match_shooter",
    "render_overlay",
    "SegmentScore", "SprParams", "SvmModel", "score_segments", "spr_rerank",
    "threshold_filter", "train_linear_svm",
    "SmokeBlob", "SmokeConfig", "StaticnessReport", "detect_smoke_blobs",
    "flow_magnitude_stats",
    "CaseAnnotation", "CaseResult", "Report", "evaluate_case",
    "load_annotations", "summarize_report",
]
