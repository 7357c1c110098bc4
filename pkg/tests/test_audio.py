import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shotloc.audio import PcmSignal, read_wav, segment_windows, extract_segment
from shotloc.errors import MalformedWav, UnsupportedEncoding


def wav_bytes(samples_by_channel, sample_rate=16000):
    """Hand-packed 16-bit PCM WAV, independent of the library writer."""
    channels = len(samples_by_channel)
    interleaved = np.stack(samples_by_channel, axis=1).astype("<i2").tobytes()
    return struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(interleaved), b"WAVE",
        b"fmt ", 16, 1, channels, sample_rate,
        sample_rate * 2 * channels, 2 * channels, 16,
        b"data", len(interleaved),
    ) + interleaved


def test_reads_one_second_of_silence(tmp_path):
    path = tmp_path / "silence.wav"
    path.write_bytes(wav_bytes([np.zeros(16000, dtype=np.int16)]))
    signal = read_wav(path)
    assert signal.sample_rate == 16000
    assert len(signal.samples) == 16000
    assert np.all(signal.samples == 0.0)
    assert signal.source_id == "silence"


def test_stereo_with_identical_channels_matches_either_channel(tmp_path):
    rng = np.random.default_rng(7)
    channel = (rng.integers(-3000, 3000, size=800)).astype(np.int16)
    path = tmp_path / "stereo.wav"
    path.write_bytes(wav_bytes([channel, channel], sample_rate=8000))
    signal = read_wav(path)
    np.testing.assert_allclose(signal.samples, channel / 32768.0)


def test_stereo_downmix_is_channel_mean(tmp_path):
    left = np.array([1000, -2000, 0, 600], dtype=np.int16)
    right = np.array([3000, 2000, 0, -600], dtype=np.int16)
    path = tmp_path / "lr.wav"
    path.write_bytes(wav_bytes([left, right], sample_rate=4000))
    signal = read_wav(path)
    np.testing.assert_allclose(signal.samples,
                               (left.astype(float) + right) / 2 / 32768.0)


def test_amplitudes_stay_in_unit_interval(tmp_path):
    extremes = np.array([-32768, 32767, 0], dtype=np.int16)
    path = tmp_path / "ext.wav"
    path.write_bytes(wav_bytes([extremes], sample_rate=1000))
    signal = read_wav(path)
    assert np.all(np.abs(signal.samples) <= 1.0)


def test_truncated_header_is_malformed(tmp_path):
    path = tmp_path / "trunc.wav"
    path.write_bytes(wav_bytes([np.zeros(10, dtype=np.int16)])[:9])
    with pytest.raises(MalformedWav):
        read_wav(path)


def test_non_pcm_format_is_unsupported(tmp_path):
    data = bytearray(wav_bytes([np.zeros(10, dtype=np.int16)]))
    struct.pack_into("<H", data, 20, 3)  # format tag 3 = IEEE float
    path = tmp_path / "float.wav"
    path.write_bytes(bytes(data))
    with pytest.raises(UnsupportedEncoding):
        read_wav(path)


def test_three_channels_are_unsupported(tmp_path):
    chans = [np.zeros(10, dtype=np.int16)] * 3
    path = tmp_path / "three.wav"
    path.write_bytes(wav_bytes(chans))
    with pytest.raises(UnsupportedEncoding):
        read_wav(path)


def signal_of_seconds(seconds, sample_rate=16000):
    n = int(round(seconds * sample_rate))
    return PcmSignal(samples=np.zeros(n), sample_rate=sample_rate, source_id="s")


def test_ten_seconds_window3_stride1_gives_eight_segments():
    segments = segment_windows(signal_of_seconds(10.0), window=3.0, stride=1.0)
    assert len(segments) == 8
    assert [s.start for s in segments] == [float(k) for k in range(8)]
    assert all(s.duration == 3.0 for s in segments)


def test_exactly_one_window_when_signal_equals_window():
    assert len(segment_windows(signal_of_seconds(3.0), 3.0, 1.0)) == 1


def test_signal_shorter_than_window_gives_empty_list():
    assert segment_windows(signal_of_seconds(2.9), 3.0, 1.0) == []


@settings(deadline=None)  # big sample allocations vary in speed under load
@given(n_samples=st.integers(0, 200000),
       window_ms=st.integers(1, 5000),
       stride_ms=st.integers(1, 5000))
def test_window_count_law(n_samples, window_ms, stride_ms):
    sr = 1000  # 1 sample per ms keeps the law exact in integer arithmetic
    signal = PcmSignal(np.zeros(n_samples), sr, "law")
    segments = segment_windows(signal, window_ms / 1000, stride_ms / 1000)
    expected = max(0, (n_samples - window_ms) // stride_ms + 1) \
        if n_samples >= window_ms else 0
    assert len(segments) == expected


def test_segment_starts_increase_by_stride():
    segments = segment_windows(signal_of_seconds(12.0), 3.0, 1.5)
    starts = [s.start for s in segments]
    assert starts == sorted(starts)
    np.testing.assert_allclose(np.diff(starts), 1.5)


def test_extract_segment_slices_the_span():
    sr = 100
    signal = PcmSignal(np.arange(1000) / 1000.0, sr, "s")
    segment = segment_windows(signal, 3.0, 1.0)[2]
    clip = extract_segment(signal, segment)
    assert len(clip.samples) == 300
    assert clip.samples[0] == signal.samples[200]


def test_nonpositive_window_or_stride_is_rejected():
    signal = signal_of_seconds(5.0)
    with pytest.raises(ValueError):
        segment_windows(signal, window=0.0, stride=1.0)
    with pytest.raises(ValueError):
        segment_windows(signal, window=3.0, stride=0.0)
