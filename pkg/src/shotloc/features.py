"""MFCC frames, k-means codebooks, and bag-of-words segment encoding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .audio import PcmSignal
from .errors import EmptySegment, InsufficientData, SignalTooShort

DEFAULT_FRAME_MS = 25.0
DEFAULT_HOP_MS = 10.0
DEFAULT_N_MELS = 26
DEFAULT_N_COEFFS = 13
DEFAULT_PREEMPHASIS = 0.97
LOG_FLOOR = 1e-10
DEFAULT_CODEBOOK_K = 256
KMEANS_MAX_ITER = 100


@dataclass(frozen=True)
class MfccFrame:
    coefficients: np.ndarray
    frame_start: float


@dataclass(frozen=True)
class Codebook:
    """k centroids in MFCC space plus the seed that produced them."""

    centroids: np.ndarray
    k: int
    training_seed: int
    distortion_history: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class BowVector:
    """L1-normalized histogram of codeword assignments for one segment."""

    histogram: np.ndarray
    segment_ref: str


def hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, sample_rate: int) -> np.ndarray:
    """Triangular mel filters over the rfft bins, (n_mels, n_fft//2 + 1)."""
    low_mel, high_mel = hz_to_mel(0.0), hz_to_mel(sample_rate / 2.0)
    mel_points = np.linspace(low_mel, high_mel, n_mels + 2)
    bins = np.floor((n_fft + 1) * mel_to_hz(mel_points) / sample_rate).astype(int)
    fbank = np.zeros((n_mels, n_fft // 2 + 1))
    for j in range(n_mels):
        left, center, right = bins[j], bins[j + 1], bins[j + 2]
        for i in range(left, center):
            fbank[j, i] = (i - left) / max(center - left, 1)
        for i in range(center, right):
            fbank[j, i] = (right - i) / max(right - center, 1)
    return fbank


def mel_band_centers_hz(n_mels: int, sample_rate: int) -> np.ndarray:
    """Center frequency of each mel band (for diagnostics and tests)."""
    low_mel, high_mel = hz_to_mel(0.0), hz_to_mel(sample_rate / 2.0)
    return mel_to_hz(np.linspace(low_mel, high_mel, n_mels + 2)[1:-1])


def frame_mel_energies(frame: np.ndarray, fbank: np.ndarray, n_fft: int,
                       preemphasis: float = DEFAULT_PREEMPHASIS) -> np.ndarray:
    """Pre-emphasize, Hamming-window, and project one frame onto mel bands."""
    y = np.empty_like(frame, dtype=np.float64)
    y[0] = frame[0]
    y[1:] = frame[1:] - preemphasis * frame[:-1]
    y = y * np.hamming(len(y))
    spectrum = np.fft.rfft(y, n_fft)
    power = (spectrum.real ** 2 + spectrum.imag ** 2) / n_fft
    return fbank @ power


def compute_mfcc(signal: PcmSignal,
                 frame_ms: float = DEFAULT_FRAME_MS,
                 hop_ms: float = DEFAULT_HOP_MS,
                 n_mels: int = DEFAULT_N_MELS,
                 n_coeffs: int = DEFAULT_N_COEFFS,
                 preemphasis: float = DEFAULT_PREEMPHASIS,
                 log_floor: float = LOG_FLOOR) -> list[MfccFrame]:
    """Mel-frequency cepstral coefficients for every full frame of the signal.

    Per frame: pre-emphasis, Hamming window, power spectrum, mel filterbank,
    log with a floor, orthonormal DCT-II, first n_coeffs coefficients kept.
    """
    if hop_ms <= 0 or frame_ms < hop_ms:
        raise ValueError("need frame_ms >= hop_ms > 0")
    if n_coeffs > n_mels:
        raise ValueError("n_coeffs must not exceed n_mels")
    sr = signal.sample_rate
    frame_len = int(round(frame_ms / 1000.0 * sr))
    hop_len = int(round(hop_ms / 1000.0 * sr))
    x = np.asarray(signal.samples, dtype=np.float64)
    if len(x) < frame_len:
        raise SignalTooShort(f"{len(x)} samples < one {frame_len}-sample frame")

    n_fft = 1
    while n_fft < frame_len:
        n_fft *= 2
    fbank = mel_filterbank(n_mels, n_fft, sr)

    frames = []
    for start in range(0, len(x) - frame_len + 1, hop_len):
        energies = frame_mel_energies(x[start:start + frame_len], fbank, n_fft,
                                      preemphasis)
        log_e = np.log(np.maximum(energies, log_floor))
        coeffs = scipy.fft.dct(log_e, type=2, norm="ortho")[:n_coeffs]
        frames.append(MfccFrame(coefficients=coeffs, frame_start=start / sr))
    return frames


def build_codebook(frames: list[MfccFrame], k: int = DEFAULT_CODEBOOK_K,
                   seed: int = 0, max_iter: int = KMEANS_MAX_ITER) -> Codebook:
    """Seeded Lloyd k-means over frame vectors.

    Initial centroids are distinct frame vectors sampled with the seed; when
    fewer than k distinct vectors exist they are cycled to fill the book.
    Distortion is non-increasing across iterations.
    """
    if len(frames) < k:
        raise InsufficientData(f"{len(frames)} frames < k={k}")
    data = np.stack([f.coefficients for f in frames]).astype(np.float64)
    uniq = np.unique(data, axis=0)
    rng = np.random.default_rng(seed)
    if len(uniq) <= k:
        centroids = uniq[np.arange(k) % len(uniq)].copy()
    else:
        centroids = uniq[rng.choice(len(uniq), size=k, replace=False)].copy()

    history = []
    assign = None
    for _ in range(max_iter):
        d2 = ((data[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(len(data)), new_assign].sum()))
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            members = data[assign == j]
            if len(members):  # empty clusters keep their centroid
                centroids[j] = members.mean(axis=0)
    return Codebook(centroids=centroids, k=k, training_seed=seed,
                    distortion_history=tuple(history))


def encode_bow(segment_frames: list[MfccFrame], codebook: Codebook,
               segment_ref: str = "") -> BowVector:
    """Histogram of nearest-centroid assignments, L1-normalized.

    Euclidean distance; ties resolve to the lowest centroid index.
    """
    if not segment_frames:
        raise EmptySegment("no frames to encode")
    data = np.stack([f.coefficients for f in segment_frames])
    d2 = ((data[:, None, :] - codebook.centroids[None, :, :]) ** 2).sum(axis=2)
    assign = np.argmin(d2, axis=1)
    hist = np.bincount(assign, minlength=codebook.k).astype(np.float64)
    return BowVector(histogram=hist / hist.sum(), segment_ref=segment_ref)
