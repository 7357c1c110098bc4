import numpy as np
import pytest

from shotloc.frames import (Frame, list_frame_files, read_pnm, write_pgm,
                            write_ppm)


def test_ppm_round_trip_keeps_rgb(tmp_path):
    rng = np.random.default_rng(0)
    rgb = rng.integers(0, 256, (12, 9, 3), dtype=np.uint8)
    path = tmp_path / "f.ppm"
    write_ppm(path, rgb)
    frame = read_pnm(path)
    np.testing.assert_array_equal(frame.rgb, rgb)
    assert frame.width == 9 and frame.height == 12
    assert frame.gray.min() >= 0.0 and frame.gray.max() <= 1.0


def test_pgm_round_trip_keeps_gray(tmp_path):
    gray = np.linspace(0.0, 1.0, 30).reshape(5, 6)
    path = tmp_path / "f.pgm"
    write_pgm(path, gray)
    frame = read_pnm(path)
    assert frame.rgb is None
    np.testing.assert_allclose(frame.gray, gray, atol=1 / 255 / 2 + 1e-12)


def test_header_comments_are_tolerated(tmp_path):
    path = tmp_path / "c.pgm"
    raster = bytes(range(6))
    path.write_bytes(b"P5\n# a comment line\n3 2\n# another\n255\n" + raster)
    frame = read_pnm(path)
    assert frame.gray.shape == (2, 3)
    assert frame.gray[1, 2] == 5 / 255


def test_truncated_raster_is_rejected(tmp_path):
    path = tmp_path / "t.ppm"
    path.write_bytes(b"P6\n4 4\n255\n" + b"\0" * 10)
    with pytest.raises(ValueError):
        read_pnm(path)


def test_unsupported_maxval_is_rejected(tmp_path):
    path = tmp_path / "m.pgm"
    path.write_bytes(b"P5\n1 1\n65535\n\0\0")
    with pytest.raises(ValueError):
        read_pnm(path)


def test_frame_files_sort_numerically(tmp_path):
    for n in (10, 2, 33, 4):
        write_pgm(tmp_path / f"{n:06d}.pgm", np.zeros((3, 3)))
    (tmp_path / "notes.txt").write_text("ignored")
    files = list_frame_files(tmp_path)
    assert [n for n, _ in files] == [2, 4, 10, 33]


def test_luma_weights_are_rec601():
    red = np.zeros((1, 1, 3), dtype=np.uint8)
    red[..., 0] = 255
    assert Frame.from_rgb(red).gray[0, 0] == pytest.approx(0.299)
