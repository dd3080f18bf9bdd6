// Console state: everything derives from API responses and SSE frames —
// no client-side simulation. Detections/actions are kept as contiguous
// id-ordered logs mirroring the server's append-only logs, so a feed gap
// is repaired by refetching `?since=<local length>`.

import type { ApiClient } from "./api.js";
import type { ActionEntry, DetectionRecord, EventRecord, PatternInfo, SimStatus } from "./types.js";
import type { SseFrame } from "./sse.js";
import { pushRolling, type Point } from "./downsample.js";

export const SERIES_CAP = 2880; // two days of minute samples

export interface ConsoleState {
  connected: { detections: boolean; events: boolean; actions: boolean };
  patterns: PatternInfo[];
  detections: DetectionRecord[];       // index == server id
  actions: ActionEntry[];              // index == server id
  kwSeries: Map<string, Point[]>;      // meter source -> rolling series
  sim: SimStatus | null;
  /** action ids we posted and have not yet seen on the actions feed */
  pendingActionIds: Set<number>;
  lastError: string | null;
}

export function initialState(): ConsoleState {
  return {
    connected: { detections: false, events: false, actions: false },
    patterns: [],
    detections: [],
    actions: [],
    kwSeries: new Map(),
    sim: null,
    pendingActionIds: new Set(),
    lastError: null,
  };
}

export function applyDetectionFrame(state: ConsoleState, frame: SseFrame): boolean {
  if (frame.id < state.detections.length) return false; // replayed duplicate
  if (frame.id > state.detections.length) return true;  // gap: needs resync
  state.detections.push({ id: frame.id, ...(frame.data as Omit<DetectionRecord, "id">) });
  return false;
}

export function applyActionFrame(state: ConsoleState, frame: SseFrame): boolean {
  if (frame.id < state.actions.length) return false;
  if (frame.id > state.actions.length) return true;
  state.actions.push({ id: frame.id, ...(frame.data as Omit<ActionEntry, "id">) });
  state.pendingActionIds.delete(frame.id);
  return false;
}

export function applyEventFrame(state: ConsoleState, frame: SseFrame): void {
  const ev = frame.data as EventRecord;
  if (ev.stream_id !== "meterstream") return;
  const reading = ev.attributes["reading"];
  if (typeof reading !== "number") return;
  let series = state.kwSeries.get(ev.source_id);
  if (!series) {
    series = [];
    state.kwSeries.set(ev.source_id, series);
  }
  pushRolling(series, { t: ev.timestamp, v: reading }, SERIES_CAP);
}

/** Refetch the tail of the detection log after a gap (or at startup). */
export async function resyncDetections(state: ConsoleState, api: ApiClient): Promise<void> {
  const page = await api.detectionsSince(state.detections.length);
  for (const d of page.detections) {
    if (d.id === state.detections.length) state.detections.push(d);
  }
}

export async function resyncActions(state: ConsoleState, api: ApiClient): Promise<void> {
  const page = await api.actionsSince(state.actions.length);
  for (const a of page.actions) {
    if (a.id === state.actions.length) {
      state.actions.push(a);
      state.pendingActionIds.delete(a.id);
    }
  }
}

/** Full load-from-scratch: what a fresh console does; also the recovery
 * path that makes a reconnect identical to a fresh load. */
export async function fullLoad(state: ConsoleState, api: ApiClient): Promise<void> {
  state.patterns = await api.patterns();
  state.sim = await api.sim();
  await resyncDetections(state, api);
  await resyncActions(state, api);
}

export function shortSource(sourceId: string): string {
  const hash = sourceId.lastIndexOf("#");
  return hash >= 0 ? sourceId.slice(hash + 1) : sourceId;
}
