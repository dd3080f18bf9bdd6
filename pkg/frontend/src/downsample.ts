// Client-side chart downsampling: at most one point per pixel column,
// keeping the last sample of each column. The raw series is never mutated.

export interface Point {
  t: number;
  v: number;
}

export function downsample(points: readonly Point[], columns: number): Point[] {
  if (columns < 1 || points.length <= columns) return points.slice();
  const t0 = points[0].t;
  const t1 = points[points.length - 1].t;
  const span = Math.max(1, t1 - t0);
  const out: Point[] = [];
  let lastCol = -1;
  for (const p of points) {
    const col = Math.min(columns - 1, Math.floor(((p.t - t0) / span) * columns));
    if (col !== lastCol) {
      out.push(p); // first sample of each column
      lastCol = col;
    }
  }
  // the newest sample always lands in the final column: swap it in so the
  // chart's right edge is current
  const last = points[points.length - 1];
  if (out[out.length - 1].t !== last.t) out[out.length - 1] = last;
  return out;
}

/** Append to a rolling series, keeping at most `cap` samples. */
export function pushRolling(series: Point[], p: Point, cap: number): void {
  series.push(p);
  if (series.length > cap) series.splice(0, series.length - cap);
}
