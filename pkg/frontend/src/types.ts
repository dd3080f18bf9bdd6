// Wire types of the gridcep HTTP/SSE API.

export interface TaxonomyTags {
  end_use: string;
  spatial: string;
  frequency: string;
  latency: string;
  representation: string;
  lifecycle: string;
  adaptivity: string;
}

export interface PatternInfo {
  pattern_id: string;
  text: string;
  tags: TaxonomyTags;
  schedule: string | null;
  status: "active" | "inactive";
}

export interface EventRef {
  stream_id: string;
  seq: number;
  timestamp: number;
  source_id: string;
}

export interface DetectionRecord {
  id: number;
  pattern_id: string;
  detection_time: number;
  consequence_time: number;
  outputs: Record<string, unknown>;
  bindings: Record<string, EventRef>;
}

export interface ActionEntry {
  id: number;
  time: number;
  rule_id: string;
  pattern_id: string;
  detection_time: number;
  command: Record<string, unknown> | null;
  outcome: "applied" | "suppressed-by-cooldown" | "target-error";
  detail: string;
}

export interface EventRecord {
  stream_id: string;
  source_id: string;
  seq: number;
  timestamp: number;
  attributes: Record<string, number | string>;
}

export interface SimStatus {
  clock: number;
  paused: boolean;
  speed: number;
  cadence: number;
  buildings: string[];
  event_counts: Record<string, number>;
  seq: number;
}

export interface Ack {
  seq: number;
  [key: string]: unknown;
}
