/**
 * Min-max decimation for large series.
 *
 * Charts render at most MAX_CHART_POINTS points.  Beyond that, points are
 * bucketed along the time axis and each bucket keeps its minimum and
 * maximum value (in time order), which preserves the visual envelope of
 * the series.  First and last points always survive.
 */

export const MAX_CHART_POINTS = 50000;

export interface ChartPoint {
  t: number;
  v: number;
  depth: number | null;
  below: boolean;
}

export function decimateSeries(
  points: ChartPoint[],
  cap: number = MAX_CHART_POINTS,
): ChartPoint[] {
  if (cap < 4) throw new Error(`cap too small: ${cap}`);
  if (points.length <= cap) return points;

  const first = points[0]!;
  const last = points[points.length - 1]!;
  const interior = points.slice(1, -1);
  const buckets = Math.floor(cap / 2) - 1;
  const out: ChartPoint[] = [first];
  for (let b = 0; b < buckets; b += 1) {
    const start = Math.floor((b * interior.length) / buckets);
    const end = Math.floor(((b + 1) * interior.length) / buckets);
    if (start >= end) continue;
    let lo = start;
    let hi = start;
    for (let i = start; i < end; i += 1) {
      if (interior[i]!.v < interior[lo]!.v) lo = i;
      if (interior[i]!.v > interior[hi]!.v) hi = i;
    }
    if (lo === hi) {
      out.push(interior[lo]!);
    } else {
      out.push(interior[Math.min(lo, hi)]!, interior[Math.max(lo, hi)]!);
    }
  }
  out.push(last);
  return out;
}
