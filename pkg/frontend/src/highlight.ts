/**
 * Query responses to map overlays, as data.
 *
 * The server returns paths as node-id sequences; coordinates come from the
 * already-fetched layer features.  Nothing here computes geometry: a node
 * without a known position simply drops out of the drawn line and is
 * reported so the console can mention it.
 */

import { Feature, FeatureCollection } from "./api.js";

export type LatLng = [number, number];

export interface NodeLocator {
  (id: number): LatLng | undefined;
}

export interface PathOverlay {
  nodeIds: number[];
  line: LatLng[];
}

export interface HighlightModel {
  overlays: PathOverlay[];
  missing: number[];
}

/** Point position of a feature: geometry first, lon/lat properties second. */
export function featurePosition(feature: Feature): LatLng | undefined {
  const geom = feature.geometry;
  if (geom && geom.type === "Point") {
    const [lon, lat] = geom.coordinates;
    return [lat, lon];
  }
  if (geom && geom.type === "LineString" && geom.coordinates.length > 0) {
    const [lon, lat] = geom.coordinates[0]!;
    return [lat, lon];
  }
  const lon = feature.properties["lon"];
  const lat = feature.properties["lat"];
  if (typeof lon === "number" && typeof lat === "number") return [lat, lon];
  return undefined;
}

export function locatorFromLayers(
  layers: FeatureCollection[],
): NodeLocator {
  const index = new Map<number, LatLng>();
  for (const layer of layers) {
    for (const feature of layer.features) {
      const pos = featurePosition(feature);
      if (pos) index.set(feature.id, pos);
    }
  }
  return (id) => index.get(id);
}

export function buildHighlight(
  paths: number[][],
  locate: NodeLocator,
): HighlightModel {
  const overlays: PathOverlay[] = [];
  const missing = new Set<number>();
  for (const path of paths) {
    const line: LatLng[] = [];
    for (const id of path) {
      const pos = locate(id);
      if (pos) line.push(pos);
      else missing.add(id);
    }
    overlays.push({ nodeIds: path, line });
  }
  return { overlays, missing: [...missing].sort((a, b) => a - b) };
}
