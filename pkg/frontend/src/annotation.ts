/** Annotation draft: reviewer-drawn geometry plus schema-driven attributes.
 *
 * Validation mirrors the server phase for phase: the form is generated from
 * the schema document the service publishes, so enum sets and ranges live
 * in exactly one place.
 */

import type {
  AnnotationPayload,
  AnnotationSchema,
  AttributeSpec,
  Box,
  Point,
} from "./types.js";

export function validateAttribute(
  spec: AttributeSpec,
  value: unknown,
): string | null {
  switch (spec.type) {
    case "enum":
      return spec.values.includes(String(value))
        ? null
        : `must be one of: ${spec.values.join(", ")}`;
    case "integer": {
      const n = typeof value === "number" ? value : Number.NaN;
      if (!Number.isInteger(n) || n < spec.min || n > spec.max) {
        return `must be an integer between ${spec.min} and ${spec.max}`;
      }
      return null;
    }
    case "boolean":
      return typeof value === "boolean" ? null : "must be true or false";
  }
}

export function normalizeBox(a: Point, b: Point): Box {
  return {
    x0: Math.min(a.x, b.x),
    y0: Math.min(a.y, b.y),
    x1: Math.max(a.x, b.x),
    y1: Math.max(a.y, b.y),
  };
}

export function boxIsUsable(box: Box): boolean {
  return box.x1 - box.x0 >= 2 && box.y1 - box.y0 >= 2;
}

export class AnnotationDraft {
  shooterBox: Box | null = null;
  smokeBox: Box | null = null;
  muzzle: Point | null = null;
  attributes: Record<string, unknown> = {};

  constructor(private readonly schema: AnnotationSchema) {}

  setAttribute(name: string, value: unknown): string | null {
    const spec = this.schema.attributes[name];
    if (!spec) return `unknown attribute ${name}`;
    const problem = validateAttribute(spec, value);
    if (problem === null) {
      this.attributes[name] = value;
    }
    return problem;
  }

  /** Muzzle placement only makes sense between an existing pair of boxes. */
  canPlaceMuzzle(): boolean {
    return this.shooterBox !== null && this.smokeBox !== null;
  }

  placeMuzzle(point: Point): string | null {
    if (!this.canPlaceMuzzle()) {
      return "draw the shooter and smoke boxes before the muzzle point";
    }
    this.muzzle = point;
    return null;
  }

  problems(): string[] {
    const out: string[] = [];
    if (!this.shooterBox) out.push("shooter box not drawn");
    if (!this.smokeBox) out.push("smoke box not drawn");
    if (!this.muzzle) out.push("muzzle point not placed");
    for (const [name, value] of Object.entries(this.attributes)) {
      const spec = this.schema.attributes[name];
      if (!spec) {
        out.push(`unknown attribute ${name}`);
        continue;
      }
      const problem = validateAttribute(spec, value);
      if (problem) out.push(`${name}: ${problem}`);
    }
    return out;
  }

  canSubmit(): boolean {
    return this.problems().length === 0;
  }

  payload(frameIndex: number): AnnotationPayload {
    if (!this.shooterBox || !this.smokeBox || !this.muzzle) {
      throw new Error("incomplete annotation");
    }
    return {
      frame_index: frameIndex,
      shooter_bbox: [
        this.shooterBox.x0,
        this.shooterBox.y0,
        this.shooterBox.x1,
        this.shooterBox.y1,
      ],
      smoke_bbox: [
        this.smokeBox.x0,
        this.smokeBox.y0,
        this.smokeBox.x1,
        this.smokeBox.y1,
      ],
      muzzle_point: [this.muzzle.x, this.muzzle.y],
      attributes: { ...this.attributes },
    };
  }
}
