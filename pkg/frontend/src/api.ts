/** Thin typed client for the pipeline service; the UI's only data source. */

import type {
  AnnotationPayload,
  AnnotationSchema,
  NextReviewResponse,
  SegmentsResponse,
  VerdictPayload,
  VideosResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ReviewApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        detail = JSON.stringify(await response.json());
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  videos(): Promise<VideosResponse> {
    return this.request("/api/videos");
  }

  videoSegments(videoId: string, minConf = 0): Promise<SegmentsResponse> {
    return this.request(
      `/api/videos/${encodeURIComponent(videoId)}/segments?min_conf=${minConf}`,
    );
  }

  nextReview(): Promise<NextReviewResponse> {
    return this.request("/api/review/next");
  }

  postVerdict(segmentId: string, verdict: VerdictPayload): Promise<unknown> {
    return this.request(`/api/segments/${encodeURIComponent(segmentId)}/verdict`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(verdict),
    });
  }

  postAnnotation(segmentId: string, payload: AnnotationPayload): Promise<unknown> {
    return this.request(
      `/api/segments/${encodeURIComponent(segmentId)}/annotations`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
      },
    );
  }

  annotationSchema(): Promise<AnnotationSchema> {
    return this.request("/api/schema/annotation");
  }

  frameUrl(segmentId: string, n: number): string {
    return `${this.base}/api/segments/${encodeURIComponent(segmentId)}/frames/${n}`;
  }

  flowUrl(segmentId: string, n: number): string {
    return `${this.base}/api/segments/${encodeURIComponent(segmentId)}/flow/${n}`;
  }

  overlayUrl(segmentId: string, n: number): string {
    return `${this.base}/api/segments/${encodeURIComponent(segmentId)}/overlay/${n}`;
  }
}
