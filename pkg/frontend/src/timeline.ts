// Detection timeline: coalesce per-pattern detections into bands (one
// lane per pattern, experiment-results style).

import type { DetectionRecord } from "./types.js";

export interface Band {
  patternId: string;
  start: number;
  end: number;
  count: number;
  /** bound entities (event sources) seen inside the band, for hover text */
  entities: string[];
}

export interface Lane {
  patternId: string;
  bands: Band[];
}

function entitiesOf(d: DetectionRecord): string[] {
  const out: string[] = [];
  for (const ref of Object.values(d.bindings)) out.push(ref.source_id);
  return out;
}

/** Merge consecutive detections <= gap apart into disjoint bands per
 * pattern. Input must be time-ordered per pattern (log order is). */
export function coalesceDetections(detections: DetectionRecord[], gap: number): Map<string, Band[]> {
  const lanes = new Map<string, Band[]>();
  for (const d of detections) {
    let bands = lanes.get(d.pattern_id);
    if (!bands) {
      bands = [];
      lanes.set(d.pattern_id, bands);
    }
    const last = bands[bands.length - 1];
    if (last && d.detection_time - last.end <= gap) {
      last.end = d.detection_time;
      last.count += 1;
      for (const e of entitiesOf(d)) {
        if (!last.entities.includes(e)) last.entities.push(e);
      }
    } else {
      bands.push({
        patternId: d.pattern_id,
        start: d.detection_time,
        end: d.detection_time,
        count: 1,
        entities: entitiesOf(d),
      });
    }
  }
  return lanes;
}

/** One lane per pattern id (even when empty), in the given pattern order. */
export function buildLanes(patternIds: string[], detections: DetectionRecord[], gap: number): Lane[] {
  const coalesced = coalesceDetections(detections, gap);
  const lanes: Lane[] = patternIds.map((pid) => ({
    patternId: pid,
    bands: coalesced.get(pid) ?? [],
  }));
  // patterns that detected but were not listed still get a lane at the end
  for (const [pid, bands] of coalesced) {
    if (!patternIds.includes(pid)) lanes.push({ patternId: pid, bands });
  }
  return lanes;
}

export function bandTitle(band: Band): string {
  const span = band.end > band.start ? `${band.start}..${band.end}` : `${band.start}`;
  const who = band.entities.length ? ` [${band.entities.join(", ")}]` : "";
  return `${band.patternId}: ${band.count} detection${band.count === 1 ? "" : "s"} @ ${span}${who}`;
}
