import numpy as np
import pytest

from shotloc.audio import PcmSignal
from shotloc.errors import EmptySegment, InsufficientData, SignalTooShort
from shotloc.features import (DEFAULT_PREEMPHASIS, LOG_FLOOR, MfccFrame,
                              build_codebook, compute_mfcc, encode_bow,
                              mel_band_centers_hz, mel_filterbank)

SR = 16000


def direct_dft_mel_energies(frame, n_mels=26):
    """Oracle: same front end, but the spectrum comes from an explicit DFT sum."""
    frame = np.asarray(frame, dtype=np.float64)
    y = np.empty_like(frame)
    y[0] = frame[0]
    y[1:] = frame[1:] - DEFAULT_PREEMPHASIS * frame[:-1]
    y = y * np.hamming(len(y))
    n_fft = 1
    while n_fft < len(frame):
        n_fft *= 2
    padded = np.zeros(n_fft)
    padded[:len(y)] = y
    n = np.arange(n_fft)
    bins = np.arange(n_fft // 2 + 1)
    basis = np.exp(-2j * np.pi * np.outer(bins, n) / n_fft)
    spectrum = basis @ padded
    power = (spectrum.real ** 2 + spectrum.imag ** 2) / n_fft
    return mel_filterbank(n_mels, n_fft, SR) @ power


def tone(freq, seconds=0.2, amplitude=0.5):
    t = np.arange(int(SR * seconds)) / SR
    return PcmSignal(amplitude * np.sin(2 * np.pi * freq * t), SR, "tone")


def test_zero_frame_has_constant_log_energy_and_zero_higher_coefficients():
    frames = compute_mfcc(PcmSignal(np.zeros(SR), SR, "z"))
    first = frames[0].coefficients
    # constant log spectrum: only the constant basis vector survives the DCT
    assert abs(first[0] - np.log(LOG_FLOOR) * np.sqrt(26)) < 1e-6
    assert np.all(np.abs(first[1:]) < 1e-9)


def test_one_khz_tone_peaks_in_band_nearest_one_khz():
    signal = tone(1000.0)
    frame = signal.samples[:int(0.025 * SR)]
    energies = direct_dft_mel_energies(frame)
    centers = mel_band_centers_hz(26, SR)
    distances = np.abs(centers - 1000.0)
    # 1 kHz sits a hair from equidistant between two centers; any center
    # within the tie tolerance counts as nearest
    nearest = set(np.flatnonzero(distances <= distances.min() * 1.02))
    assert int(np.argmax(energies)) in nearest


def test_mel_energies_match_direct_dft_oracle():
    signal = tone(1000.0)
    frame = signal.samples[:int(0.025 * SR)]
    oracle = direct_dft_mel_energies(frame)

    from shotloc.features import frame_mel_energies
    n_fft = 512
    ours = frame_mel_energies(frame, mel_filterbank(26, n_fft, SR), n_fft)
    np.testing.assert_allclose(ours, oracle, rtol=1e-6, atol=1e-12)
    assert np.argmax(ours) == np.argmax(oracle)


def test_mfcc_is_deterministic():
    signal = tone(440.0)
    a = compute_mfcc(signal)
    b = compute_mfcc(signal)
    assert len(a) == len(b)
    for fa, fb in zip(a, b):
        np.testing.assert_array_equal(fa.coefficients, fb.coefficients)


def test_gain_change_only_moves_coefficient_zero():
    rng = np.random.default_rng(3)
    base = PcmSignal(0.2 * rng.standard_normal(SR // 2), SR, "noise")
    louder = PcmSignal(base.samples * 4.0, SR, "noise4")
    for fa, fb in zip(compute_mfcc(base), compute_mfcc(louder)):
        np.testing.assert_allclose(fa.coefficients[1:], fb.coefficients[1:],
                                   atol=1e-6)
        assert fb.coefficients[0] > fa.coefficients[0]


def test_too_short_signal_raises():
    with pytest.raises(SignalTooShort):
        compute_mfcc(PcmSignal(np.zeros(100), SR, "tiny"))


def test_frame_count_and_starts():
    frames = compute_mfcc(PcmSignal(np.zeros(SR), SR, "z"))  # 1 s
    # 25 ms frames, 10 ms hop: floor((16000-400)/160)+1
    assert len(frames) == (SR - 400) // 160 + 1
    assert frames[0].frame_start == 0.0
    assert abs(frames[1].frame_start - 0.010) < 1e-12


def frames_from_rows(rows):
    return [MfccFrame(np.asarray(r, dtype=float), i * 0.01)
            for i, r in enumerate(rows)]


def test_k1_codebook_is_the_mean_vector():
    rows = [[0.0, 0.0], [2.0, 4.0], [4.0, 2.0]]
    book = build_codebook(frames_from_rows(rows), k=1, seed=0)
    np.testing.assert_allclose(book.centroids[0], [2.0, 2.0])


def test_k_at_least_distinct_count_gives_zero_distortion():
    rows = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]
    book = build_codebook(frames_from_rows(rows), k=3, seed=1)
    assert book.distortion_history[-1] == 0.0
    for row in {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)}:
        assert any(np.allclose(c, row) for c in book.centroids)


def test_same_seed_reproduces_codebook():
    rng = np.random.default_rng(11)
    rows = rng.standard_normal((60, 5))
    a = build_codebook(frames_from_rows(rows), k=8, seed=42)
    b = build_codebook(frames_from_rows(rows), k=8, seed=42)
    np.testing.assert_array_equal(a.centroids, b.centroids)


def test_distortion_never_increases():
    rng = np.random.default_rng(5)
    rows = rng.standard_normal((200, 4))
    book = build_codebook(frames_from_rows(rows), k=12, seed=3)
    history = np.array(book.distortion_history)
    assert np.all(np.diff(history) <= 1e-9)


def test_fewer_frames_than_k_raises():
    with pytest.raises(InsufficientData):
        build_codebook(frames_from_rows([[0.0], [1.0]]), k=3)


def unit_codebook():
    rows = np.eye(4)
    return build_codebook(frames_from_rows(rows), k=4, seed=0)


def test_bow_one_hot_when_all_frames_share_a_centroid():
    book = unit_codebook()
    target = book.centroids[3]
    frames = frames_from_rows([target + 0.01, target - 0.01, target])
    bow = encode_bow(frames, book)
    assert bow.histogram[np.argmax(bow.histogram)] == 1.0
    np.testing.assert_allclose(bow.histogram.sum(), 1.0, atol=1e-9)


def test_bow_histogram_sums_to_one():
    rng = np.random.default_rng(9)
    book = build_codebook(frames_from_rows(rng.standard_normal((50, 3))), k=5,
                          seed=2)
    bow = encode_bow(frames_from_rows(rng.standard_normal((37, 3))), book)
    assert abs(bow.histogram.sum() - 1.0) < 1e-9
    assert len(bow.histogram) == book.k


def test_empty_frame_list_raises():
    with pytest.raises(EmptySegment):
        encode_bow([], unit_codebook())


def test_bow_is_equivariant_under_codebook_permutation():
    rng = np.random.default_rng(13)
    book = build_codebook(frames_from_rows(rng.standard_normal((40, 3))), k=6,
                          seed=1)
    frames = frames_from_rows(rng.standard_normal((25, 3)))
    bow = encode_bow(frames, book)

    from shotloc.features import Codebook
    perm = rng.permutation(6)
    permuted = Codebook(centroids=book.centroids[perm], k=6, training_seed=0)
    bow_perm = encode_bow(frames, permuted)
    np.testing.assert_allclose(bow_perm.histogram, bow.histogram[perm])


def test_bow_ties_resolve_to_the_lowest_centroid_index():
    from shotloc.features import Codebook
    book = Codebook(centroids=np.array([[1.0, 0.0], [-1.0, 0.0]]), k=2,
                    training_seed=0)
    equidistant = frames_from_rows([[0.0, 5.0]])  # same distance to both
    bow = encode_bow(equidistant, book)
    np.testing.assert_allclose(bow.histogram, [1.0, 0.0])


def test_mfcc_parameter_preconditions():
    signal = PcmSignal(np.zeros(SR), SR, "z")
    with pytest.raises(ValueError):
        compute_mfcc(signal, frame_ms=5.0, hop_ms=10.0)  # frame < hop
    with pytest.raises(ValueError):
        compute_mfcc(signal, n_mels=13, n_coeffs=20)
