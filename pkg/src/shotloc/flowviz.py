"""Color-wheel rendering of flow fields (direction = hue, magnitude = saturation)."""

from __future__ import annotations

import numpy as np

from .flow import FlowField
from .floio import UNKNOWN_FLOW
from .frames import Frame

# hue segment lengths: red-yellow, yellow-green, green-cyan, cyan-blue,
# blue-magenta, magenta-red
WHEEL_SEGMENTS = (15, 6, 4, 11, 13, 6)
N_WHEEL = sum(WHEEL_SEGMENTS)  # 55


def make_colorwheel() -> np.ndarray:
    """(55, 3) RGB wheel walked red->yellow->green->cyan->blue->magenta->red."""
    ry, yg, gc, cb, bm, mr = WHEEL_SEGMENTS
    wheel = np.zeros((N_WHEEL, 3))
    col = 0
    wheel[col:col + ry, 0] = 255
    wheel[col:col + ry, 1] = np.floor(255 * np.arange(ry) / ry)
    col += ry
    wheel[col:col + yg, 0] = 255 - np.floor(255 * np.arange(yg) / yg)
    wheel[col:col + yg, 1] = 255
    col += yg
    wheel[col:col + gc, 1] = 255
    wheel[col:col + gc, 2] = np.floor(255 * np.arange(gc) / gc)
    col += gc
    wheel[col:col + cb, 1] = 255 - np.floor(255 * np.arange(cb) / cb)
    wheel[col:col + cb, 2] = 255
    col += cb
    wheel[col:col + bm, 2] = 255
    wheel[col:col + bm, 0] = np.floor(255 * np.arange(bm) / bm)
    col += bm
    wheel[col:col + mr, 2] = 255 - np.floor(255 * np.arange(mr) / mr)
    wheel[col:col + mr, 0] = 255
    return wheel


_WHEEL = make_colorwheel()


def hue_bin(u, v) -> np.ndarray:
    """Wheel bin index of a vector; one full turn spans exactly 55 bins."""
    angle = np.arctan2(-np.asarray(v, dtype=np.float64),
                       -np.asarray(u, dtype=np.float64)) / np.pi  # [-1, 1]
    fk = (angle + 1.0) / 2.0 * N_WHEEL
    return np.floor(fk).astype(int) % N_WHEEL


def flow_to_color(field: FlowField, max_mag: float | None = None) -> Frame:
    """Render a flow field with the 55-hue color wheel.

    Hue encodes atan2(-v, -u); saturation encodes magnitude relative to
    max_mag (99th percentile of valid magnitudes when not given). Zero flow
    is white; invalid or huge (> 1e9) vectors render black.
    """
    u = field.u.astype(np.float64)
    v = field.v.astype(np.float64)
    bad = (~field.valid | ~np.isfinite(u) | ~np.isfinite(v)
           | (np.abs(u) > UNKNOWN_FLOW) | (np.abs(v) > UNKNOWN_FLOW))
    u = np.where(bad, 0.0, u)
    v = np.where(bad, 0.0, v)

    mag = np.hypot(u, v)
    if max_mag is None:
        usable = mag[~bad]
        max_mag = float(np.percentile(usable, 99.0)) if usable.size else 0.0
    rad = mag / max_mag if max_mag > 0 else np.zeros_like(mag)

    angle = np.arctan2(-v, -u) / np.pi
    fk = (angle + 1.0) / 2.0 * N_WHEEL
    k0 = np.floor(fk).astype(int) % N_WHEEL
    k1 = (k0 + 1) % N_WHEEL
    f = fk - np.floor(fk)

    rgb = np.zeros(u.shape + (3,), dtype=np.uint8)
    for c in range(3):
        col0 = _WHEEL[k0, c] / 255.0
        col1 = _WHEEL[k1, c] / 255.0
        col = (1.0 - f) * col0 + f * col1
        inside = rad <= 1.0
        col[inside] = 1.0 - rad[inside] * (1.0 - col[inside])
        col[~inside] *= 0.75
        rgb[..., c] = np.floor(255.0 * col).astype(np.uint8)
    rgb[bad] = 0
    return Frame.from_rgb(rgb)
