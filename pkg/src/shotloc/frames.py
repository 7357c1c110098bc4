"""Video frames as arrays, plus binary PNM (P5/P6) reading and writing."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Frame:
    """Grayscale intensities in [0, 1]; the RGB source is kept for overlays."""

    gray: np.ndarray
    rgb: np.ndarray | None = None

    @property
    def height(self) -> int:
        return self.gray.shape[0]

    @property
    def width(self) -> int:
        return self.gray.shape[1]

    @staticmethod
    def from_rgb(rgb: np.ndarray) -> "Frame":
        rgb = np.asarray(rgb, dtype=np.uint8)
        # Rec.601 luma
        gray = (0.299 * rgb[..., 0] + 0.587 * rgb[..., 1]
                + 0.114 * rgb[..., 2]) / 255.0
        return Frame(gray=gray, rgb=rgb)

    @staticmethod
    def from_gray(gray: np.ndarray) -> "Frame":
        return Frame(gray=np.asarray(gray, dtype=np.float64))


def _read_pnm_header(data: bytes, path: Path) -> tuple[bytes, int, int, int, int]:
    """Parse magic, width, height, maxval; returns offset of the raster."""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        if pos >= len(data):
            raise ValueError(f"{path}: truncated PNM header")
        chunk = data[pos:pos + 1]
        if chunk == b"#":
            pos = data.index(b"\n", pos) + 1
        elif chunk.isspace():
            pos += 1
        else:
            match = re.match(rb"[^\s#]+", data[pos:])
            tokens.append(match.group(0))
            pos += match.end()
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    return magic, w, h, maxval, pos + 1  # single whitespace after maxval


def read_pnm(path: str | Path) -> Frame:
    """Read an 8-bit binary P5 (graymap) or P6 (pixmap) file."""
    path = Path(path)
    data = path.read_bytes()
    magic, w, h, maxval, offset = _read_pnm_header(data, path)
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"{path}: unsupported PNM magic {magic!r}")
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PNM supported (maxval {maxval})")
    channels = 3 if magic == b"P6" else 1
    need = w * h * channels
    raster = np.frombuffer(data, dtype=np.uint8, count=need, offset=offset)
    if raster.size < need:
        raise ValueError(f"{path}: truncated PNM raster")
    if channels == 3:
        return Frame.from_rgb(raster.reshape(h, w, 3))
    return Frame(gray=raster.reshape(h, w).astype(np.float64) / 255.0)


def write_ppm(path: str | Path, rgb: np.ndarray) -> None:
    rgb = np.ascontiguousarray(np.asarray(rgb, dtype=np.uint8))
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(rgb.tobytes())


def write_pgm(path: str | Path, gray01: np.ndarray) -> None:
    g = np.clip(np.asarray(gray01, dtype=np.float64), 0.0, 1.0)
    raster = np.round(g * 255.0).astype(np.uint8)
    h, w = raster.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(raster.tobytes())


_FRAME_SUFFIX = re.compile(r"(\d+)\.(ppm|pgm|pnm)$")


def list_frame_files(directory: str | Path) -> list[tuple[int, Path]]:
    """Frame files sorted by their zero-padded numeric suffix."""
    out = []
    for p in Path(directory).iterdir():
        m = _FRAME_SUFFIX.search(p.name)
        if m:
            out.append((int(m.group(1)), p))
    out.sort()
    return out
