"""Dense optical flow by coarse-to-fine Horn-Schunck relaxation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from .errors import DimensionMismatch, FrameTooSmall
from .frames import Frame

MIN_FRAME_SIDE = 16

_AVG_KERNEL = np.array([[0.0, 0.25, 0.0],
                        [0.25, 0.0, 0.25],
                        [0.0, 0.25, 0.0]])


@dataclass(frozen=True)
class FlowParams:
    alpha: float = 15.0          # smoothness weight
    iterations: int = 100        # relaxation sweeps per pyramid level
    pyramid_levels: int = 4
    scale: float = 0.5           # per-level shrink factor

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.iterations < 1 or self.pyramid_levels < 1:
            raise ValueError("iterations and pyramid_levels must be >= 1")
        if not 0.0 < self.scale < 1.0:
            raise ValueError("scale must lie in (0, 1)")


@dataclass(frozen=True)
class FlowField:
    """Per-pixel displacement between two frames, in pixels."""

    u: np.ndarray  # x displacement, float32
    v: np.ndarray  # y displacement, float32
    valid: np.ndarray  # bool mask

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @staticmethod
    def from_uv(u: np.ndarray, v: np.ndarray,
                valid: np.ndarray | None = None) -> "FlowField":
        u = np.asarray(u, dtype=np.float32)
        v = np.asarray(v, dtype=np.float32)
        if valid is None:
            valid = np.ones(u.shape, dtype=bool)
        return FlowField(u=u, v=v, valid=np.asarray(valid, dtype=bool))

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u.astype(np.float64), self.v.astype(np.float64))


def _neighbor_average(x: np.ndarray) -> np.ndarray:
    # replicate padding; at the border the mean counts the pixel itself,
    # which only damps the update and keeps the energy monotone
    return scipy.ndimage.convolve(x, _AVG_KERNEL, mode="nearest")


def _derivatives(a: np.ndarray, b: np.ndarray):
    mean = 0.5 * (a + b)
    ix = np.gradient(mean, axis=1)  # central differences, replicated edges
    iy = np.gradient(mean, axis=0)
    it = b - a
    return ix, iy, it


def hs_energy(u: np.ndarray, v: np.ndarray, ix: np.ndarray, iy: np.ndarray,
              it: np.ndarray, alpha: float) -> float:
    """Discrete Horn-Schunck objective the relaxation descends on."""
    data = ix * u + iy * v + it
    beta2 = alpha * alpha / 4.0
    smooth = (np.sum(np.diff(u, axis=0) ** 2) + np.sum(np.diff(u, axis=1) ** 2)
              + np.sum(np.diff(v, axis=0) ** 2) + np.sum(np.diff(v, axis=1) ** 2))
    return float(np.sum(data * data) + beta2 * smooth)


def hs_iterate(a: np.ndarray, b: np.ndarray, alpha: float, iterations: int,
               record_energy: bool = False):
    """Horn-Schunck relaxation on one frame pair, starting from zero flow.

    Simultaneous (Jacobi-style) updates; rows are independent within a sweep.
    Returns (u, v, energies) with energies populated when recording.
    """
    ix, iy, it = _derivatives(a, b)
    denom = alpha * alpha + ix * ix + iy * iy
    u = np.zeros_like(a)
    v = np.zeros_like(a)
    energies = []
    for _ in range(iterations):
        u_bar = _neighbor_average(u)
        v_bar = _neighbor_average(v)
        t = (ix * u_bar + iy * v_bar + it) / denom
        u = u_bar - ix * t
        v = v_bar - iy * t
        if record_energy:
            energies.append(hs_energy(u, v, ix, iy, it, alpha))
    return u, v, energies


def resize_bilinear(img: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    th, tw = shape
    h, w = img.shape
    ys = np.linspace(0, h - 1, th)
    xs = np.linspace(0, w - 1, tw)
    grid = np.meshgrid(ys, xs, indexing="ij")
    return scipy.ndimage.map_coordinates(img, grid, order=1, mode="nearest")


def warp_backward(img: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sample img at (y + v, x + u), clamped bilinear."""
    h, w = img.shape
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    return scipy.ndimage.map_coordinates(img, [yy + v, xx + u], order=1,
                                         mode="nearest")


def _build_pyramid(img: np.ndarray, levels: int, scale: float) -> list[np.ndarray]:
    pyramid = [img]
    for _ in range(levels - 1):
        prev = pyramid[-1]
        th = int(round(prev.shape[0] * scale))
        tw = int(round(prev.shape[1] * scale))
        if min(th, tw) < MIN_FRAME_SIDE:
            break
        smooth = scipy.ndimage.gaussian_filter(prev, sigma=1.0, mode="nearest")
        pyramid.append(resize_bilinear(smooth, (th, tw)))
    return pyramid


def compute_flow(a: Frame, b: Frame, params: FlowParams = FlowParams()) -> FlowField:
    """Dense flow from frame a to frame b.

    Coarse-to-fine: each level warps b toward a by the upsampled estimate
    and solves for the residual, so large displacements are recovered from
    the coarse levels and refined downward.
    """
    # solve on the classical 0..255 intensity convention alpha is tuned for
    ga = np.asarray(a.gray, dtype=np.float64) * 255.0
    gb = np.asarray(b.gray, dtype=np.float64) * 255.0
    if ga.shape != gb.shape:
        raise DimensionMismatch(f"frames {ga.shape} vs {gb.shape}")
    if min(ga.shape) < MIN_FRAME_SIDE:
        raise FrameTooSmall(f"frames must be at least {MIN_FRAME_SIDE} px per side")

    pyr_a = _build_pyramid(ga, params.pyramid_levels, params.scale)
    pyr_b = _build_pyramid(gb, params.pyramid_levels, params.scale)

    u = np.zeros_like(pyr_a[-1])
    v = np.zeros_like(pyr_a[-1])
    for level in range(len(pyr_a) - 1, -1, -1):
        la, lb = pyr_a[level], pyr_b[level]
        if u.shape != la.shape:
            coarse_h, coarse_w = u.shape
            u = resize_bilinear(u, la.shape) * (la.shape[1] / coarse_w)
            v = resize_bilinear(v, la.shape) * (la.shape[0] / coarse_h)
        warped = warp_backward(lb, u, v)
        du, dv, _ = hs_iterate(la, warped, params.alpha, params.iterations)
        u = u + du
        v = v + dv
    return FlowField.from_uv(u, v)
