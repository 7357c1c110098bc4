/** Triage queue state: confidence-ordered, optimistic verdicts with rollback. */

import { ApiError, ReviewApi } from "./api.js";
import type { SegmentSummary } from "./types.js";

export interface QueueState {
  /** Unreviewed gated segments, highest confidence first. */
  queue: SegmentSummary[];
  current: SegmentSummary | null;
  remaining: number;
  busy: boolean;
  /** Human-readable banner message when the service misbehaves. */
  error: string | null;
}

type Listener = (state: QueueState) => void;

export function sortQueue(segments: SegmentSummary[]): SegmentSummary[] {
  return [...segments].sort(
    (a, b) =>
      b.confidence - a.confidence ||
      a.start - b.start ||
      a.video_id.localeCompare(b.video_id),
  );
}

export class TriageQueue {
  private state: QueueState = {
    queue: [],
    current: null,
    remaining: 0,
    busy: false,
    error: null,
  };
  private listeners: Listener[] = [];

  constructor(private readonly api: ReviewApi) {}

  getState(): QueueState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    listener(this.state);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private set(partial: Partial<QueueState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Pull the full unreviewed queue; ordering matches /api/review/next. */
  async load(): Promise<void> {
    this.set({ busy: true });
    try {
      const next = await this.api.nextReview();
      const videos = await this.api.videos();
      const queue: SegmentSummary[] = [];
      for (const video of videos.videos) {
        const { segments } = await this.api.videoSegments(video.video_id);
        for (const segment of segments) {
          if (segment.gated && segment.review_state === "unreviewed") {
            queue.push(segment);
          }
        }
      }
      this.set({
        queue: sortQueue(queue),
        current: next.segment,
        remaining: next.remaining,
        busy: false,
        error: null,
      });
    } catch (err) {
      this.set({ busy: false, error: describe(err) });
    }
  }

  /**
   * Post a verdict for the current item. The queue advances optimistically;
   * a failed POST puts the item back and surfaces an error notice.
   */
  async submitVerdict(visibleGunshot: boolean, reviewer: string,
                      notes = ""): Promise<boolean> {
    const judged = this.state.current;
    if (!judged || this.state.busy) return false;
    const restoreQueue = this.state.queue;
    const restoreRemaining = this.state.remaining;

    const rest = this.state.queue.filter(
      (s) => s.segment_id !== judged.segment_id,
    );
    this.set({
      queue: rest,
      current: rest[0] ?? null,
      remaining: Math.max(0, restoreRemaining - 1),
      busy: true,
      error: null,
    });
    try {
      await this.api.postVerdict(judged.segment_id, {
        visible_gunshot: visibleGunshot,
        reviewer,
        notes,
      });
      const next = await this.api.nextReview();
      this.set({ current: next.segment, remaining: next.remaining, busy: false });
      return true;
    } catch (err) {
      // roll the optimistic advance back: the item rejoins the queue
      this.set({
        queue: restoreQueue,
        current: judged,
        remaining: restoreRemaining,
        busy: false,
        error: `verdict not saved, still in queue: ${describe(err)}`,
      });
      return false;
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.status === 0 ? err.message : `HTTP ${err.status}: ${err.message}`;
  }
  return String(err);
}
