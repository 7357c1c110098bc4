import { describe, expect, it } from "vitest";

import { ReviewApi } from "../src/api.js";
import { TriageQueue, sortQueue } from "../src/queueStore.js";
import { FakeService } from "./fakeService.js";

import nextReviewFixture from "./fixtures/next_review.json";

function makeQueue() {
  const service = new FakeService();
  const queue = new TriageQueue(new ReviewApi("", service.fetch));
  return { service, queue };
}

describe("triage queue", () => {
  it("displays unreviewed gated segments in confidence-descending order", async () => {
    const { queue } = makeQueue();
    await queue.load();
    const state = queue.getState();
    const confidences = state.queue.map((s) => s.confidence);
    expect(confidences).toEqual([0.9, 0.8, 0.75]);
    expect([...confidences].sort((a, b) => b - a)).toEqual(confidences);
  });

  it("shows the same head segment the service's next-review reports", async () => {
    const { queue } = makeQueue();
    await queue.load();
    const state = queue.getState();
    expect(state.current?.segment_id).toBe(
      nextReviewFixture.segment.segment_id,
    );
    expect(state.current?.segment_id).toBe(state.queue[0]?.segment_id);
    expect(state.remaining).toBe(nextReviewFixture.remaining);
  });

  it("advances to the next segment after a verdict POST", async () => {
    const { service, queue } = makeQueue();
    await queue.load();
    const first = queue.getState().current!;
    const ok = await queue.submitVerdict(true, "ana");
    expect(ok).toBe(true);
    const state = queue.getState();
    expect(state.current?.confidence).toBe(0.8);
    expect(state.current?.segment_id).not.toBe(first.segment_id);
    expect(state.remaining).toBe(2);
    const posted = service.requests.find((r) => r.method === "POST");
    expect(posted?.url).toContain(encodeURIComponent(first.segment_id));
    expect(posted?.body).toMatchObject({
      visible_gunshot: true,
      reviewer: "ana",
    });
  });

  it("drains to an empty queue after all verdicts", async () => {
    const { queue } = makeQueue();
    await queue.load();
    for (let i = 0; i < 3; i += 1) {
      await queue.submitVerdict(false, "ana");
    }
    const state = queue.getState();
    expect(state.current).toBeNull();
    expect(state.remaining).toBe(0);
  });

  it("returns the item to the queue with an error notice on a failed POST", async () => {
    const { service, queue } = makeQueue();
    await queue.load();
    const before = queue.getState();
    const judged = before.current!;
    const queueBefore = before.queue.map((s) => s.segment_id);

    service.failNextPost = true;
    const ok = await queue.submitVerdict(true, "ana");
    expect(ok).toBe(false);

    const state = queue.getState();
    expect(state.current?.segment_id).toBe(judged.segment_id);
    expect(state.queue.map((s) => s.segment_id)).toEqual(queueBefore);
    expect(state.remaining).toBe(before.remaining);
    expect(state.error).toMatch(/still in queue/);
  });

  it("surfaces an unreachable service as a banner error", async () => {
    const { service, queue } = makeQueue();
    service.unreachable = true;
    await queue.load();
    const state = queue.getState();
    expect(state.error).toMatch(/unreachable/);
    expect(state.current).toBeNull();

    service.unreachable = false;
    await queue.load(); // the retry path
    expect(queue.getState().error).toBeNull();
    expect(queue.getState().current).not.toBeNull();
  });

  it("never invents segments: rendered items round-trip from responses", async () => {
    const { service, queue } = makeQueue();
    await queue.load();
    const served = new Set(service.segments.map((s) => s.segment_id));
    for (const item of queue.getState().queue) {
      expect(served.has(item.segment_id)).toBe(true);
    }
  });
});

describe("sortQueue", () => {
  it("breaks confidence ties by start then video id", () => {
    const base = {
      duration: 3,
      rank: 1,
      stage: "reranked",
      frame_first: 0,
      frame_last: 15,
      review_state: "unreviewed" as const,
      gated: true,
    };
    const sorted = sortQueue([
      { ...base, segment_id: "b:2", video_id: "b", start: 2, confidence: 0.8 },
      { ...base, segment_id: "a:2", video_id: "a", start: 2, confidence: 0.8 },
      { ...base, segment_id: "a:1", video_id: "a", start: 1, confidence: 0.8 },
      { ...base, segment_id: "c:0", video_id: "c", start: 0, confidence: 0.9 },
    ]);
    expect(sorted.map((s) => s.segment_id)).toEqual([
      "c:0",
      "a:1",
      "a:2",
      "b:2",
    ]);
  });
});
