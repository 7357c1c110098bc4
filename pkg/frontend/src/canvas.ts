/** Drag-rectangle state machine and canvas drawing helpers. */

import { normalizeBox } from "./annotation.js";
import type { Box, Point } from "./types.js";

export type DragResult =
  | { kind: "none" }
  | { kind: "dragging"; preview: Box }
  | { kind: "committed"; box: Box };

export class RectDrag {
  private anchor: Point | null = null;

  begin(point: Point): void {
    this.anchor = point;
  }

  move(point: Point): DragResult {
    if (!this.anchor) return { kind: "none" };
    return { kind: "dragging", preview: normalizeBox(this.anchor, point) };
  }

  finish(point: Point): DragResult {
    if (!this.anchor) return { kind: "none" };
    const box = normalizeBox(this.anchor, point);
    this.anchor = null;
    return { kind: "committed", box };
  }

  cancel(): void {
    this.anchor = null;
  }
}

export function drawBox(
  ctx: CanvasRenderingContext2D,
  box: Box,
  color: string,
  label?: string,
): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.strokeRect(box.x0, box.y0, box.x1 - box.x0, box.y1 - box.y0);
  if (label) {
    ctx.fillStyle = color;
    ctx.font = "12px sans-serif";
    ctx.fillText(label, box.x0 + 2, Math.max(10, box.y0 - 4));
  }
}

export function drawCross(
  ctx: CanvasRenderingContext2D,
  point: Point,
  color: string,
  arm = 6,
): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(point.x - arm, point.y);
  ctx.lineTo(point.x + arm, point.y);
  ctx.moveTo(point.x, point.y - arm);
  ctx.lineTo(point.x, point.y + arm);
  ctx.stroke();
}
