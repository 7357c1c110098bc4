"""Linear gunshot classifier, probability calibration, and self-paced reranking."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .audio import Segment
from .errors import DegenerateLabels, DimensionMismatch, EmptyRanking
from .features import BowVector

DEFAULT_REG = 1e-2
DEFAULT_SGD_STEPS = 2000
GATE_CONFIDENCE = 0.70

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class SvmModel:
    """Linear two-class model with logistic calibration of margins."""

    weights: np.ndarray
    bias: float
    calibration: tuple[float, float]  # confidence = sigmoid(a * margin + b)

    def margins(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.shape[-1] != self.weights.shape[0]:
            raise DimensionMismatch(
                f"features have {features.shape[-1]} dims, model has "
                f"{self.weights.shape[0]}")
        return features @ self.weights + self.bias

    def confidences(self, features: np.ndarray) -> np.ndarray:
        a, b = self.calibration
        return sigmoid(a * self.margins(features) + b)


@dataclass(frozen=True)
class SegmentScore:
    segment_ref: Segment
    margin: float
    confidence: float
    rank: int
    stage: str  # "initial" | "reranked"


@dataclass
class SplState:
    """Bookkeeping of one self-paced reranking run."""

    lambdas: list[float] = field(default_factory=list)
    round: int = 0
    selected: set[int] = field(default_factory=set)
    losses: np.ndarray | None = None


@dataclass(frozen=True)
class SprParams:
    lambda0: float | None = None      # default: 20th percentile of initial losses
    mu: float = 1.3                   # geometric growth of the admission threshold
    max_rounds: int = 10
    pseudo_fraction: float = 0.2      # top/bottom fraction used as pseudo-labels
    reg: float = DEFAULT_REG
    seed: int = 0

    def __post_init__(self):
        if self.mu <= 1.0:
            raise ValueError("mu must exceed 1 so the threshold grows")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not 0.0 < self.pseudo_fraction <= 0.5:
            raise ValueError("pseudo_fraction must lie in (0, 0.5]")


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def _as_matrix(features: Sequence[BowVector] | np.ndarray) -> np.ndarray:
    if isinstance(features, np.ndarray):
        return np.asarray(features, dtype=np.float64)
    return np.stack([np.asarray(f.histogram, dtype=np.float64) for f in features])


def svm_objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray,
                  sample_weights: np.ndarray, reg: float) -> float:
    """Weighted mean hinge loss plus (reg/2)*||w||^2."""
    margins = y * (X @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins)
    return float((sample_weights * hinge).sum() / sample_weights.sum()
                 + 0.5 * reg * (w @ w))


def svm_subgradient(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray,
                    sample_weights: np.ndarray, reg: float):
    """Analytic subgradient of svm_objective at (w, b)."""
    margins = y * (X @ w + b)
    active = (margins < 1.0).astype(np.float64) * sample_weights * y
    total = sample_weights.sum()
    grad_w = reg * w - (active @ X) / total
    grad_b = -active.sum() / total
    return grad_w, float(grad_b)


def fit_platt_calibration(margins: np.ndarray, labels: np.ndarray,
                          max_iter: int = 100) -> tuple[float, float]:
    """Logistic fit of P(y=+1 | margin) with smoothed targets.

    Target smoothing keeps the slope finite on separable training sets.
    """
    margins = np.asarray(margins, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n_pos = float((labels > 0).sum())
    n_neg = float((labels < 0).sum())
    targets = np.where(labels > 0, (n_pos + 1.0) / (n_pos + 2.0),
                       1.0 / (n_neg + 2.0))
    a, b = 0.0, float(np.log((n_neg + 1.0) / (n_pos + 1.0)))

    def loss(a_, b_):
        z = a_ * margins + b_
        # numerically stable -[t*log(p) + (1-t)*log(1-p)]
        return float(np.sum(np.logaddexp(0.0, -z) + (1.0 - targets) * z))

    current = loss(a, b)
    for _ in range(max_iter):
        p = sigmoid(a * margins + b)
        g = np.array([np.sum((p - targets) * margins), np.sum(p - targets)])
        w = np.maximum(p * (1.0 - p), 1e-12)
        h = np.array([[np.sum(w * margins * margins), np.sum(w * margins)],
                      [np.sum(w * margins), np.sum(w)]])
        h[0, 0] += 1e-12
        h[1, 1] += 1e-12
        step = np.linalg.solve(h, g)
        scale, accepted = 1.0, None
        for _ in range(30):  # backtrack until the loss actually drops
            na, nb = a - scale * step[0], b - scale * step[1]
            new = loss(na, nb)
            if new <= current + 1e-12:
                accepted = (na, nb, new)
                break
            scale *= 0.5
        if accepted is None:
            break
        converged = current - accepted[2] < 1e-12
        a, b, current = accepted
        if converged:
            break
    return float(a), float(b)


def train_linear_svm(features: Sequence[BowVector] | np.ndarray,
                     labels: Sequence[int] | np.ndarray,
                     sample_weights: Sequence[float] | np.ndarray | None = None,
                     reg: float = DEFAULT_REG,
                     steps: int = DEFAULT_SGD_STEPS,
                     seed: int = 0) -> SvmModel:
    """Minimize weighted hinge loss + L2 by deterministic subgradient descent.

    Full-batch updates with the 1/(reg*t) step schedule; the seed fixes the
    tiny random initialization so identical inputs give identical models.
    Calibration is a logistic fit on the training margins.
    """
    X = _as_matrix(features)
    y = np.asarray(labels, dtype=np.float64)
    if sample_weights is None:
        sw = np.ones(len(y))
    else:
        sw = np.asarray(sample_weights, dtype=np.float64)
    live = sw > 0
    if not ((y[live] > 0).any() and (y[live] < 0).any()):
        raise DegenerateLabels("need both classes among positively weighted samples")

    rng = np.random.default_rng(seed)
    w = rng.normal(scale=1e-3, size=X.shape[1])
    b = 0.0
    for t in range(steps):
        grad_w, grad_b = svm_subgradient(w, b, X, y, sw, reg)
        eta = 1.0 / (reg * (t + 1))
        w = w - eta * grad_w
        b = b - eta * grad_b

    margins = X @ w + b
    calibration = fit_platt_calibration(margins, y)
    return SvmModel(weights=w, bias=float(b), calibration=calibration)


def score_segments(model: SvmModel,
                   features: Sequence[BowVector],
                   segments: Sequence[Segment] | None = None,
                   stage: str = "initial") -> list[SegmentScore]:
    """Margin and calibrated confidence per segment, ranked by confidence.

    Ties break on segment start, then source_id, so output is deterministic.
    """
    if segments is None:
        # stand-in segments keep the tie-break deterministic (input order)
        segments = [Segment(str(getattr(f, "segment_ref", "") or f"seg{i}"),
                            float(i), 0.0, (0, 0))
                    for i, f in enumerate(features)]
    X = _as_matrix(features)
    margins = model.margins(X)
    confs = model.confidences(X)
    order = sorted(range(len(segments)),
                   key=lambda i: (-confs[i], segments[i].start,
                                  segments[i].source_id))
    return [
        SegmentScore(segment_ref=segments[i], margin=float(margins[i]),
                     confidence=float(confs[i]), rank=r + 1, stage=stage)
        for r, i in enumerate(order)
    ]


def spl_select(losses: np.ndarray, lam: float) -> set[int]:
    """Hard self-paced selection: admit samples with loss strictly below lam."""
    return {int(i) for i in np.flatnonzero(np.asarray(losses) < lam)}


def _confidence_loss(conf: np.ndarray, pseudo: np.ndarray) -> np.ndarray:
    """Loss of a pseudo-labeled sample under calibrated confidences."""
    return np.where(pseudo > 0, 1.0 - conf, conf)


def spr_rerank(scores: list[SegmentScore],
               features: Sequence[BowVector] | np.ndarray,
               params: SprParams = SprParams(),
               return_state: bool = False):
    """Self-paced reranking of a scored segment list.

    Pseudo-labels come from the initial ranking (top fraction positive,
    bottom fraction negative, middle held out). Rounds alternate between
    fitting a reranking model on the admitted samples and re-admitting by
    loss threshold, which grows geometrically until everything is admitted
    or the round cap is hit. The final model rescores every segment.
    """
    if not scores:
        raise EmptyRanking("nothing to rerank")
    X = _as_matrix(features)
    if X.shape[0] != len(scores):
        raise DimensionMismatch("features and scores must align one-to-one")

    by_rank = sorted(range(len(scores)), key=lambda i: scores[i].rank)
    n = len(scores)
    n_lab = max(1, int(round(params.pseudo_fraction * n)))
    pool = np.array(by_rank[:n_lab] + by_rank[-n_lab:])
    pseudo = np.concatenate([np.ones(n_lab), -np.ones(n_lab)])

    conf0 = np.array([scores[i].confidence for i in pool])
    losses = _confidence_loss(conf0, pseudo)
    lam = params.lambda0 if params.lambda0 is not None else float(
        np.percentile(losses, 20.0))

    state = SplState(losses=losses)
    model = None
    for rnd in range(1, params.max_rounds + 1):
        selected = spl_select(losses, lam)
        # the curriculum must always contain both classes to be trainable
        for cls in (1.0, -1.0):
            cls_idx = np.flatnonzero(pseudo == cls)
            if not any(i in selected for i in cls_idx):
                selected.add(int(cls_idx[np.argmin(losses[cls_idx])]))
        sel = sorted(selected)
        model = train_linear_svm(X[pool[sel]], pseudo[sel],
                                 reg=params.reg, seed=params.seed)
        losses = _confidence_loss(model.confidences(X[pool]), pseudo)
        state.round = rnd
        state.lambdas.append(lam)
        state.selected = selected
        if len(selected) == len(pool):
            break
        lam *= params.mu

    reranked = score_segments(model, X, [s.segment_ref for s in scores],
                              stage="reranked")
    if return_state:
        return reranked, state
    return reranked


def threshold_filter(scores: list[SegmentScore],
                     tau: float = GATE_CONFIDENCE) -> list[SegmentScore]:
    """Keep segments whose confidence strictly exceeds tau, order preserved."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    return [s for s in scores if s.confidence > tau]


# --- model (de)serialization -------------------------------------------------

def save_model(path: str | Path, model: SvmModel,
               codebook_payload: dict | None = None,
               mfcc_params: dict | None = None) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "weights": model.weights.tolist(),
        "bias": model.bias,
        "calibration": list(model.calibration),
        "feature_dim": int(model.weights.shape[0]),
    }
    if codebook_payload is not None:
        doc["codebook"] = codebook_payload
    if mfcc_params is not None:
        doc["mfcc"] = mfcc_params
    Path(path).write_text(json.dumps(doc))


def load_model(path: str | Path) -> tuple[SvmModel, dict]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format {doc.get('format_version')}")
    model = SvmModel(weights=np.asarray(doc["weights"], dtype=np.float64),
                     bias=float(doc["bias"]),
                     calibration=(float(doc["calibration"][0]),
                                  float(doc["calibration"][1])))
    return model, doc


def rescored_copy(score: SegmentScore, **changes) -> SegmentScore:
    return replace(score, **changes)
