import { describe, expect, it } from "vitest";

import { Feature, FeatureCollection } from "../src/api.js";
import {
  buildHighlight,
  featurePosition,
  locatorFromLayers,
} from "../src/highlight.js";

function pointFeature(id: number, lon: number, lat: number): Feature {
  return {
    type: "Feature",
    id,
    geometry: { type: "Point", coordinates: [lon, lat] },
    properties: { id: `n-${id}` },
  };
}

function collection(features: Feature[]): FeatureCollection {
  return { type: "FeatureCollection", features };
}

describe("featurePosition", () => {
  it("swaps GeoJSON lon/lat into leaflet lat/lng order", () => {
    expect(featurePosition(pointFeature(1, -7.5, 38.2))).toEqual([38.2, -7.5]);
  });

  it("falls back to lon/lat properties", () => {
    const feature: Feature = {
      type: "Feature",
      id: 2,
      geometry: null,
      properties: { lon: -7.4, lat: 38.1 },
    };
    expect(featurePosition(feature)).toEqual([38.1, -7.4]);
  });

  it("uses the first vertex of a line", () => {
    const feature: Feature = {
      type: "Feature",
      id: 3,
      geometry: {
        type: "LineString",
        coordinates: [
          [-7.3, 38.0],
          [-7.2, 38.1],
        ],
      },
      properties: {},
    };
    expect(featurePosition(feature)).toEqual([38.0, -7.3]);
  });

  it("returns undefined when nothing is available", () => {
    const feature: Feature = {
      type: "Feature",
      id: 4,
      geometry: null,
      properties: { name: "anonymous" },
    };
    expect(featurePosition(feature)).toBeUndefined();
  });
});

describe("buildHighlight", () => {
  const locate = locatorFromLayers([
    collection([
      pointFeature(1, -7.5, 38.2),
      pointFeature(2, -7.4, 38.3),
      pointFeature(3, -7.3, 38.4),
    ]),
  ]);

  it("maps a path onto located coordinates", () => {
    const model = buildHighlight([[1, 2, 3]], locate);
    expect(model.overlays).toHaveLength(1);
    expect(model.overlays[0]!.line).toEqual([
      [38.2, -7.5],
      [38.3, -7.4],
      [38.4, -7.3],
    ]);
    expect(model.overlays[0]!.nodeIds).toEqual([1, 2, 3]);
    expect(model.missing).toEqual([]);
  });

  it("collects unlocatable nodes instead of failing", () => {
    const model = buildHighlight(
      [
        [1, 99, 3],
        [98, 2],
      ],
      locate,
    );
    expect(model.overlays[0]!.line).toHaveLength(2);
    expect(model.overlays[1]!.line).toHaveLength(1);
    expect(model.missing).toEqual([98, 99]);
  });

  it("keeps one overlay per path", () => {
    const model = buildHighlight([[1], [2], [3]], locate);
    expect(model.overlays).toHaveLength(3);
  });

  it("merges locators across layers, later layers overriding", () => {
    const merged = locatorFromLayers([
      collection([pointFeature(7, -1.0, 50.0)]),
      collection([pointFeature(7, -2.0, 51.0), pointFeature(8, -3.0, 52.0)]),
    ]);
    expect(merged(7)).toEqual([51.0, -2.0]);
    expect(merged(8)).toEqual([52.0, -3.0]);
  });
});
