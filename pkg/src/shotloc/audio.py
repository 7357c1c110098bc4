"""WAV decoding and fixed-stride windowing of mono audio."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MalformedWav, UnsupportedEncoding

DEFAULT_WINDOW_S = 3.0
DEFAULT_STRIDE_S = 1.0


@dataclass(frozen=True)
class PcmSignal:
    """Mono audio in [-1, 1] at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int
    source_id: str

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class Segment:
    """One analysis window of a source signal."""

    source_id: str
    start: float
    duration: float
    sample_span: tuple[int, int]

    @property
    def segment_id(self) -> str:
        """Stable identifier: source plus start in integer milliseconds."""
        return f"{self.source_id}:{round(self.start * 1000)}"


def read_wav(path: str | Path) -> PcmSignal:
    """Decode a RIFF/WAVE file holding signed 16-bit PCM, 1 or 2 channels.

    Stereo is downmixed by averaging the channels; integer samples are
    scaled by 1/32768 so every amplitude lies in [-1, 1].
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWav(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise MalformedWav(f"{path}: fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < chunk_size:
                raise MalformedWav(f"{path}: data chunk truncated")
            payload = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None or payload is None:
        raise MalformedWav(f"{path}: missing fmt or data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if audio_format != 1:
        raise UnsupportedEncoding(f"{path}: audio format {audio_format}, want PCM (1)")
    if bits != 16:
        raise UnsupportedEncoding(f"{path}: {bits}-bit samples, want 16")
    if n_channels not in (1, 2):
        raise UnsupportedEncoding(f"{path}: {n_channels} channels, want 1 or 2")
    if sample_rate <= 0:
        raise MalformedWav(f"{path}: nonpositive sample rate")

    raw = np.frombuffer(payload[:len(payload) - len(payload) % (2 * n_channels)],
                        dtype="<i2")
    if raw.size == 0:
        raise MalformedWav(f"{path}: empty data chunk")
    samples = raw.astype(np.float64) / 32768.0
    if n_channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    return PcmSignal(samples=samples, sample_rate=sample_rate, source_id=path.stem)


def write_wav(path: str | Path, samples: np.ndarray, sample_rate: int) -> None:
    """Write mono float samples in [-1, 1] as 16-bit PCM (fixture/demo helper)."""
    pcm = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    raw = (pcm * 32767.0).astype("<i2").tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(raw), b"WAVE",
        b"fmt ", 16, 1, 1, sample_rate, sample_rate * 2, 2, 16,
        b"data", len(raw),
    )
    Path(path).write_bytes(header + raw)


def segment_windows(signal: PcmSignal,
                    window: float = DEFAULT_WINDOW_S,
                    stride: float = DEFAULT_STRIDE_S) -> list[Segment]:
    """Cut the signal into full windows starting at 0, stride, 2*stride, ...

    Incomplete tail windows are dropped so every segment has the exact
    window length. The count obeys max(0, floor((len - window)/stride) + 1).
    """
    if window <= 0 or stride <= 0:
        raise ValueError("window and stride must be positive")
    sr = signal.sample_rate
    win = int(round(window * sr))
    hop = int(round(stride * sr))
    out = []
    start = 0
    while start + win <= len(signal.samples):
        out.append(Segment(
            source_id=signal.source_id,
            start=start / sr,
            duration=window,
            sample_span=(start, start + win),
        ))
        start += hop
    return out


def extract_segment(signal: PcmSignal, segment: Segment) -> PcmSignal:
    """Slice the samples backing one segment."""
    lo, hi = segment.sample_span
    return PcmSignal(samples=signal.samples[lo:hi],
                     sample_rate=signal.sample_rate,
                     source_id=signal.source_id)
