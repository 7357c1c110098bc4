/** Annotation editor: drag shooter/smoke boxes, click the muzzle, fill the
 * attribute form generated from the service schema, submit. */

import { ReviewApi } from "../api.js";
import { AnnotationDraft } from "../annotation.js";
import { RectDrag, drawBox, drawCross } from "../canvas.js";
import type { AnnotationSchema, Point, SegmentSummary } from "../types.js";

type Tool = "shooter" | "smoke" | "muzzle";

export class AnnotateView {
  private draft: AnnotationDraft;
  private tool: Tool = "shooter";
  private drag = new RectDrag();
  private frame: number;
  private status = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ReviewApi,
    private readonly schema: AnnotationSchema,
    private readonly segment: SegmentSummary,
    private readonly onDone: () => void,
  ) {
    this.draft = new AnnotationDraft(schema);
    this.frame = segment.frame_first;
    this.render();
  }

  private render(): void {
    this.root.replaceChildren();
    const header = document.createElement("h2");
    header.textContent = `annotate ${this.segment.video_id} @ ` +
      `${this.segment.start.toFixed(1)}s (frame ${this.frame})`;
    this.root.append(header);

    const stage = document.createElement("div");
    stage.className = "stage";
    const img = new Image();
    img.src = this.api.frameUrl(this.segment.segment_id, this.frame);
    img.className = "stage-frame";
    const canvas = document.createElement("canvas");
    canvas.className = "stage-canvas";
    img.onload = () => {
      canvas.width = img.naturalWidth;
      canvas.height = img.naturalHeight;
      this.paint(canvas);
    };
    this.wireCanvas(canvas);
    stage.append(img, canvas);
    this.root.append(stage);

    const tools = document.createElement("div");
    tools.className = "tools";
    for (const tool of ["shooter", "smoke", "muzzle"] as Tool[]) {
      const button = document.createElement("button");
      button.textContent = tool;
      button.className = tool === this.tool ? "tool active" : "tool";
      button.disabled = tool === "muzzle" && !this.draft.canPlaceMuzzle();
      button.title = button.disabled
        ? "draw the shooter and smoke boxes first"
        : "";
      button.onclick = () => {
        this.tool = tool;
        this.render();
      };
      tools.append(button);
    }
    this.root.append(tools);

    this.root.append(this.buildForm());

    const actions = document.createElement("div");
    actions.className = "actions";
    const submit = document.createElement("button");
    submit.textContent = "submit annotation";
    submit.disabled = !this.draft.canSubmit();
    submit.title = this.draft.problems().join("; ");
    submit.onclick = () => void this.submit();
    const back = document.createElement("button");
    back.textContent = "back to queue";
    back.onclick = () => this.onDone();
    actions.append(submit, back);
    if (this.status) {
      const note = document.createElement("p");
      note.className = "status";
      note.textContent = this.status;
      actions.append(note);
    }
    const hint = document.createElement("p");
    hint.className = "hint";
    hint.textContent = this.draft.problems().join("; ") || "ready to submit";
    actions.append(hint);
    this.root.append(actions);
  }

  /** Attribute form straight from the service schema: one source of truth. */
  private buildForm(): HTMLElement {
    const form = document.createElement("div");
    form.className = "attributes";
    for (const [name, spec] of Object.entries(this.schema.attributes)) {
      const row = document.createElement("label");
      row.textContent = `${name}: `;
      let input: HTMLElement;
      if (spec.type === "enum") {
        const select = document.createElement("select");
        const blank = document.createElement("option");
        blank.value = "";
        blank.textContent = "(unset)";
        select.append(blank);
        for (const value of spec.values) {
          const option = document.createElement("option");
          option.value = value;
          option.textContent = value;
          select.append(option);
        }
        select.onchange = () => {
          if (select.value) this.setAttribute(name, select.value, row);
        };
        input = select;
      } else if (spec.type === "integer") {
        const number = document.createElement("input");
        number.type = "number";
        number.min = String(spec.min);
        number.max = String(spec.max);
        number.onchange = () =>
          this.setAttribute(name, Number(number.value), row);
        input = number;
      } else {
        const checkbox = document.createElement("input");
        checkbox.type = "checkbox";
        checkbox.onchange = () =>
          this.setAttribute(name, checkbox.checked, row);
        input = checkbox;
      }
      row.append(input);
      const problem = document.createElement("span");
      problem.className = "problem";
      row.append(problem);
      form.append(row);
    }
    return form;
  }

  private setAttribute(name: string, value: unknown, row: HTMLElement): void {
    const problem = this.draft.setAttribute(name, value);
    const slot = row.querySelector(".problem");
    if (slot) slot.textContent = problem ?? "";
    // inline validation only; nothing is sent until the draft is complete
    this.render();
  }

  private wireCanvas(canvas: HTMLCanvasElement): void {
    const at = (event: MouseEvent): Point => {
      const rect = canvas.getBoundingClientRect();
      return {
        x: ((event.clientX - rect.left) / rect.width) * canvas.width,
        y: ((event.clientY - rect.top) / rect.height) * canvas.height,
      };
    };
    canvas.onmousedown = (event) => {
      if (this.tool === "muzzle") {
        const problem = this.draft.placeMuzzle(at(event));
        this.status = problem ?? "";
        this.render();
        return;
      }
      this.drag.begin(at(event));
    };
    canvas.onmousemove = (event) => {
      const result = this.drag.move(at(event));
      if (result.kind === "dragging") {
        this.paint(canvas, result.preview);
      }
    };
    canvas.onmouseup = (event) => {
      const result = this.drag.finish(at(event));
      if (result.kind === "committed") {
        if (this.tool === "shooter") this.draft.shooterBox = result.box;
        if (this.tool === "smoke") this.draft.smokeBox = result.box;
        this.render();
      }
    };
  }

  private paint(canvas: HTMLCanvasElement, preview?: {
    x0: number; y0: number; x1: number; y1: number;
  }): void {
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    if (this.draft.shooterBox) drawBox(ctx, this.draft.shooterBox, "#2ecc40", "shooter");
    if (this.draft.smokeBox) drawBox(ctx, this.draft.smokeBox, "#ff00ff", "smoke");
    if (this.draft.muzzle) drawCross(ctx, this.draft.muzzle, "#ffdc00");
    if (preview) drawBox(ctx, preview, "#aaaaaa");
  }

  private async submit(): Promise<void> {
    try {
      await this.api.postAnnotation(this.segment.segment_id,
                                    this.draft.payload(this.frame));
      this.status = "annotation saved";
      this.onDone();
    } catch (err) {
      this.status = `annotation not saved: ${String(err)}`;
      this.render();
    }
  }
}
