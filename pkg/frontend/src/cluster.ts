/**
 * Grid clustering for marker decluttering.
 *
 * Below the threshold every point stands alone; above it, points collapse
 * into per-cell clusters positioned at the member centroid.  Purely a
 * presentation step: inputs are coordinates the server already returned.
 */

export const CLUSTER_THRESHOLD = 2000;

export interface MarkerPoint {
  id: number;
  lon: number;
  lat: number;
}

export interface MarkerCluster {
  lon: number;
  lat: number;
  count: number;
  ids: number[];
}

export interface ClusterResult {
  clusters: MarkerCluster[];
  clustered: boolean;
}

export interface ClusterOptions {
  threshold?: number;
  /** Cell edge in degrees; derived from the point spread when omitted. */
  cellSize?: number;
}

function spreadCellSize(points: MarkerPoint[]): number {
  let minLon = Infinity;
  let maxLon = -Infinity;
  let minLat = Infinity;
  let maxLat = -Infinity;
  for (const p of points) {
    if (p.lon < minLon) minLon = p.lon;
    if (p.lon > maxLon) maxLon = p.lon;
    if (p.lat < minLat) minLat = p.lat;
    if (p.lat > maxLat) maxLat = p.lat;
  }
  const span = Math.max(maxLon - minLon, maxLat - minLat);
  return span > 0 ? span / 40 : 1;
}

export function clusterMarkers(
  points: MarkerPoint[],
  options: ClusterOptions = {},
): ClusterResult {
  const threshold = options.threshold ?? CLUSTER_THRESHOLD;
  if (points.length <= threshold) {
    return {
      clustered: false,
      clusters: points.map((p) => ({
        lon: p.lon,
        lat: p.lat,
        count: 1,
        ids: [p.id],
      })),
    };
  }
  const cell = options.cellSize ?? spreadCellSize(points);
  const buckets = new Map<string, MarkerPoint[]>();
  for (const p of points) {
    const key = `${Math.floor(p.lon / cell)}:${Math.floor(p.lat / cell)}`;
    const bucket = buckets.get(key);
    if (bucket) bucket.push(p);
    else buckets.set(key, [p]);
  }
  const clusters: MarkerCluster[] = [];
  for (const members of buckets.values()) {
    let lon = 0;
    let lat = 0;
    for (const p of members) {
      lon += p.lon;
      lat += p.lat;
    }
    clusters.push({
      lon: lon / members.length,
      lat: lat / members.length,
      count: members.length,
      ids: members.map((p) => p.id),
    });
  }
  return { clustered: true, clusters };
}
