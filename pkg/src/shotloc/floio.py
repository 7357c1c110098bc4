"""Flow-field files in the Middlebury .flo layout, bit-exact round trip."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import BadMagic, TruncatedFile
from .flow import FlowField

FLO_MAGIC = 202021.25  # float whose little-endian bytes read "PIEH"
UNKNOWN_FLOW = 1e9     # components above this mark an invalid vector


def write_flo(field: FlowField, path: str | Path) -> None:
    """4-byte float tag, int32 width, int32 height, row-major float32 (u, v).

    Invalid pixels are stored with the conventional huge sentinel value.
    """
    h, w = field.u.shape
    u = field.u.astype("<f4", copy=True)
    v = field.v.astype("<f4", copy=True)
    # stamp the sentinel only where the values would otherwise read as valid,
    # so write(read(f)) reproduces f byte for byte
    stamp = ~field.valid & (np.abs(u) < UNKNOWN_FLOW) & (np.abs(v) < UNKNOWN_FLOW)
    u[stamp] = np.float32(UNKNOWN_FLOW * 10.0)
    v[stamp] = np.float32(UNKNOWN_FLOW * 10.0)
    interleaved = np.empty((h, w, 2), dtype="<f4")
    interleaved[..., 0] = u
    interleaved[..., 1] = v
    with open(path, "wb") as fh:
        fh.write(struct.pack("<fii", FLO_MAGIC, w, h))
        fh.write(interleaved.tobytes())


def read_flo(path: str | Path) -> FlowField:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 4:
        raise TruncatedFile(f"{path}: {len(data)} bytes, header needs 12")
    if data[:4] != b"PIEH":
        raise BadMagic(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 12:
        raise TruncatedFile(f"{path}: {len(data)} bytes, header needs 12")
    w, h = struct.unpack_from("<ii", data, 4)
    if w <= 0 or h <= 0:
        raise BadMagic(f"{path}: implausible dimensions {w}x{h}")
    need = 12 + 8 * w * h
    if len(data) < need:
        raise TruncatedFile(f"{path}: {len(data)} bytes, payload needs {need}")
    interleaved = np.frombuffer(data, dtype="<f4", count=2 * w * h,
                                offset=12).reshape(h, w, 2)
    u = interleaved[..., 0].copy()
    v = interleaved[..., 1].copy()
    valid = (np.abs(u) < UNKNOWN_FLOW) & (np.abs(v) < UNKNOWN_FLOW) \
        & np.isfinite(u) & np.isfinite(v)
    return FlowField(u=u, v=v, valid=valid)
