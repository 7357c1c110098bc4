/** Triage screen: step the queue, scrub frames, toggle layers, vote. */

import { ReviewApi } from "../api.js";
import { TriageQueue } from "../queueStore.js";
import type { QueueState } from "../queueStore.js";
import type { SegmentSummary } from "../types.js";

export type Layer = "frames" | "flow" | "overlay";

export function layerUrl(
  api: ReviewApi,
  segment: SegmentSummary,
  layer: Layer,
  frame: number,
): string {
  if (layer === "flow") return api.flowUrl(segment.segment_id, frame);
  if (layer === "overlay") return api.overlayUrl(segment.segment_id, frame);
  return api.frameUrl(segment.segment_id, frame);
}

export class TriageView {
  private layer: Layer = "frames";
  private frame = 0;
  private readonly root: HTMLElement;

  constructor(
    root: HTMLElement,
    private readonly api: ReviewApi,
    private readonly queue: TriageQueue,
    private readonly reviewerName: () => string,
    private readonly onAnnotate: (segment: SegmentSummary) => void,
  ) {
    this.root = root;
    queue.subscribe((state) => this.render(state));
  }

  private render(state: QueueState): void {
    this.root.replaceChildren();

    if (state.error) {
      const banner = el("div", "banner error");
      banner.textContent = state.error;
      const retry = el("button", "retry") as HTMLButtonElement;
      retry.textContent = "retry";
      retry.onclick = () => void this.queue.load();
      banner.append(" ", retry);
      this.root.append(banner);
    }

    const current = state.current;
    if (!current) {
      const done = el("p", "all-done");
      done.textContent = state.busy
        ? "loading review queue..."
        : "queue is empty: every gated segment has a verdict";
      this.root.append(done);
      this.renderQueueList(state);
      return;
    }
    if (this.frame < current.frame_first || this.frame > current.frame_last) {
      this.frame = current.frame_first;
    }

    const header = el("h2");
    header.textContent =
      `${current.video_id} @ ${current.start.toFixed(1)}s  ` +
      `confidence ${(current.confidence * 100).toFixed(1)}%`;
    this.root.append(header);

    const img = el("img", "viewer") as HTMLImageElement;
    img.src = layerUrl(this.api, current, this.layer, this.frame);
    img.alt = `${this.layer} ${this.frame}`;
    this.root.append(img);

    const controls = el("div", "controls");
    for (const layer of ["frames", "flow", "overlay"] as Layer[]) {
      const button = el("button",
        layer === this.layer ? "layer active" : "layer") as HTMLButtonElement;
      button.textContent = layer;
      button.onclick = () => {
        this.layer = layer;
        this.render(state);
      };
      controls.append(button);
    }
    const scrub = el("input") as HTMLInputElement;
    scrub.type = "range";
    scrub.min = String(current.frame_first);
    scrub.max = String(current.frame_last);
    scrub.value = String(this.frame);
    scrub.oninput = () => {
      this.frame = Number(scrub.value);
      img.src = layerUrl(this.api, current, this.layer, this.frame);
    };
    controls.append(scrub);
    this.root.append(controls);

    const verdicts = el("div", "verdicts");
    const yes = el("button", "confirm") as HTMLButtonElement;
    yes.textContent = "visible gunshot";
    yes.disabled = state.busy;
    yes.onclick = () => void this.queue.submitVerdict(true, this.reviewerName());
    const no = el("button", "reject") as HTMLButtonElement;
    no.textContent = "no visible gunshot";
    no.disabled = state.busy;
    no.onclick = () => void this.queue.submitVerdict(false, this.reviewerName());
    const annotate = el("button", "annotate") as HTMLButtonElement;
    annotate.textContent = "annotate...";
    annotate.onclick = () => this.onAnnotate(current);
    verdicts.append(yes, no, annotate);
    this.root.append(verdicts);

    this.renderQueueList(state);
  }

  private renderQueueList(state: QueueState): void {
    const list = el("ol", "queue");
    for (const segment of state.queue) {
      const item = el("li");
      item.textContent =
        `${segment.video_id} @ ${segment.start.toFixed(1)}s ` +
        `(${(segment.confidence * 100).toFixed(1)}%)`;
      list.append(item);
    }
    const caption = el("p", "remaining");
    caption.textContent = `${state.remaining} unreviewed`;
    this.root.append(caption, list);
  }
}

function el(tag: string, className?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  return node;
}
