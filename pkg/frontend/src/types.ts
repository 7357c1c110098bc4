/** Wire types mirroring the review service's JSON responses. */

export interface SegmentSummary {
  segment_id: string;
  video_id: string;
  start: number;
  duration: number;
  confidence: number;
  rank: number;
  stage: string;
  frame_first: number;
  frame_last: number;
  review_state: "unreviewed" | "confirmed" | "rejected";
  gated: boolean;
}

export interface NextReviewResponse {
  segment: SegmentSummary | null;
  remaining: number;
}

export interface SegmentsResponse {
  segments: SegmentSummary[];
}

export interface VideosResponse {
  videos: { video_id: string; n_segments: number; n_gated: number }[];
}

export type AttributeSpec =
  | { type: "enum"; values: string[] }
  | { type: "integer"; min: number; max: number }
  | { type: "boolean" };

export interface AnnotationSchema {
  attributes: Record<string, AttributeSpec>;
  geometry: Record<string, { type: string }>;
}

export interface VerdictPayload {
  visible_gunshot: boolean;
  reviewer: string;
  notes?: string;
}

export interface AnnotationPayload {
  frame_index: number;
  shooter_bbox: [number, number, number, number];
  smoke_bbox: [number, number, number, number];
  muzzle_point: [number, number];
  attributes: Record<string, unknown>;
}

export interface Box {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface Point {
  x: number;
  y: number;
}
