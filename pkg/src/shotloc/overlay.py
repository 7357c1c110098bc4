"""Labeled overlay frames: flow blended over video, boxes, and markers."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .frames import Frame
from .localize import MuzzleEstimate, PersonBox
from .smoke import SmokeBlob

SHOOTER_COLOR = (0, 255, 0)
SMOKE_COLOR = (255, 0, 255)
MUZZLE_COLOR = (255, 255, 0)
LABEL_COLOR = (255, 255, 255)
BLEND_ALPHA = 0.4

# 3x5 glyphs for the labels drawn on overlays
_GLYPHS = {
    "s": ("###", "#..", "###", "..#", "###"),
    "h": ("#.#", "#.#", "###", "#.#", "#.#"),
    "o": ("###", "#.#", "#.#", "#.#", "###"),
    "t": ("###", ".#.", ".#.", ".#.", ".#."),
    "e": ("###", "#..", "###", "#..", "###"),
    "r": ("##.", "#.#", "##.", "##.", "#.#"),
    "m": ("#.#", "###", "#.#", "#.#", "#.#"),
    "k": ("#.#", "##.", "#..", "##.", "#.#"),
    "u": ("#.#", "#.#", "#.#", "#.#", "###"),
    "z": ("###", "..#", ".#.", "#..", "###"),
    "l": ("#..", "#..", "#..", "#..", "###"),
}


def _put(img: np.ndarray, y: int, x: int, color) -> None:
    if 0 <= y < img.shape[0] and 0 <= x < img.shape[1]:
        img[y, x] = color


def draw_text(img: np.ndarray, origin: tuple[int, int], text: str,
              color=LABEL_COLOR) -> None:
    x0, y0 = origin
    for ch in text:
        glyph = _GLYPHS.get(ch)
        if glyph is None:
            x0 += 4
            continue
        for dy, row in enumerate(glyph):
            for dx, cell in enumerate(row):
                if cell == "#":
                    _put(img, y0 + dy, x0 + dx, color)
        x0 += 4


def draw_rect(img: np.ndarray, bbox, color) -> None:
    """1-px border of the integer rectangle [x0, x1) x [y0, y1), clipped."""
    h, w = img.shape[:2]
    x0 = int(round(bbox[0]))
    y0 = int(round(bbox[1]))
    x1 = int(round(bbox[2])) - 1
    y1 = int(round(bbox[3])) - 1
    cx0, cx1 = max(x0, 0), min(x1, w - 1)
    cy0, cy1 = max(y0, 0), min(y1, h - 1)
    if cx0 > cx1 or cy0 > cy1:
        return
    if 0 <= y0 < h:
        img[y0, cx0:cx1 + 1] = color
    if 0 <= y1 < h:
        img[y1, cx0:cx1 + 1] = color
    if 0 <= x0 < w:
        img[cy0:cy1 + 1, x0] = color
    if 0 <= x1 < w:
        img[cy0:cy1 + 1, x1] = color


def draw_cross(img: np.ndarray, point, color, arm: int = 4) -> None:
    x, y = int(round(point[0])), int(round(point[1]))
    for d in range(-arm, arm + 1):
        _put(img, y, x + d, color)
        _put(img, y + d, x, color)


def render_overlay(frame: Frame, flow_viz: Frame,
                   blend_mask: np.ndarray | None = None,
                   people: list[PersonBox] = (),
                   smoke: list[SmokeBlob] = (),
                   muzzle: MuzzleEstimate | None = None) -> Frame:
    """Compose the triage picture: flow where it moves, then annotations.

    The flow visualization is alpha-blended only where blend_mask is set
    (the caller passes the smoke threshold mask), so static regions show
    the untouched video frame.
    """
    if frame.rgb is None:
        base = np.repeat(np.round(frame.gray * 255.0).astype(np.uint8)[..., None],
                         3, axis=2)
    else:
        base = frame.rgb.copy()
    viz = flow_viz.rgb
    if viz is None or viz.shape != base.shape:
        raise DimensionMismatch("frame and flow visualization differ in shape")
    out = base.copy()
    if blend_mask is not None and blend_mask.any():
        if blend_mask.shape != base.shape[:2]:
            raise DimensionMismatch("blend mask does not match the frame")
        mixed = np.round((1.0 - BLEND_ALPHA) * base[blend_mask].astype(np.float64)
                         + BLEND_ALPHA * viz[blend_mask].astype(np.float64))
        out[blend_mask] = mixed.astype(np.uint8)

    for box in people:
        draw_rect(out, box.bbox, SHOOTER_COLOR)
        draw_text(out, (int(round(box.bbox[0])), int(round(box.bbox[1])) - 6),
                  "shooter")
    for blob in smoke:
        draw_rect(out, blob.bbox, SMOKE_COLOR)
        draw_text(out, (int(round(blob.bbox[0])), int(round(blob.bbox[1])) - 6),
                  "smoke")
    if muzzle is not None:
        draw_cross(out, muzzle.point, MUZZLE_COLOR)
        draw_text(out, (int(round(muzzle.point[0])) + 6,
                        int(round(muzzle.point[1])) - 2), "muzzle")
    return Frame.from_rgb(out)
