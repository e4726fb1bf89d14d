/**
 * Leaflet glue: one layer group per server resource, visibility toggles
 * that never refetch, cluster rendering for dense station sets, and the
 * emphasized overlays for query results.
 */

import { Feature, FeatureCollection } from "./api.js";
import { clusterMarkers, MarkerPoint } from "./cluster.js";
import { featurePosition, HighlightModel, LatLng } from "./highlight.js";
import { LayerName } from "./state.js";

const LAYER_STYLE: Record<LayerName, L.PathOptions> = {
  watersheds: { color: "#2274a5", weight: 1, fillOpacity: 0.08 },
  landuse: { color: "#32936f", weight: 1, fillOpacity: 0.15 },
  stretches: { color: "#4a6fa5", weight: 2, opacity: 0.8 },
  waternodes: { color: "#6b4e71", radius: 4, fillOpacity: 0.9 },
  stations: { color: "#e83f6f", radius: 4, fillOpacity: 0.9 },
};

const EMPHASIS: L.PathOptions = { color: "#ff6600", weight: 4, opacity: 1 };

export interface MapViewCallbacks {
  onFeatureClick?: (layer: LayerName, feature: Feature) => void;
}

export class MapView {
  private map: L.Map;
  private groups: Record<LayerName, L.LayerGroup>;
  private highlightGroup: L.LayerGroup;
  private emphasisGroup: L.LayerGroup;
  private data = new Map<LayerName, FeatureCollection>();

  constructor(
    element: HTMLElement,
    private callbacks: MapViewCallbacks = {},
  ) {
    this.map = L.map(element);
    this.map.setView([38.2, -7.6], 9);
    L.tileLayer("https://tile.openstreetmap.org/{z}/{x}/{y}.png", {
      attribution: "&copy; OpenStreetMap contributors",
    }).addTo(this.map);
    this.groups = {
      watersheds: L.layerGroup().addTo(this.map),
      landuse: L.layerGroup().addTo(this.map),
      stretches: L.layerGroup().addTo(this.map),
      waternodes: L.layerGroup().addTo(this.map),
      stations: L.layerGroup().addTo(this.map),
    };
    this.highlightGroup = L.layerGroup().addTo(this.map);
    this.emphasisGroup = L.layerGroup().addTo(this.map);
  }

  /** Replace a layer's features and redraw it. */
  setLayerData(layer: LayerName, collection: FeatureCollection): void {
    this.data.set(layer, collection);
    this.redraw(layer);
  }

  /** Toggle visibility from the already-fetched data; no network. */
  setLayerVisible(layer: LayerName, visible: boolean): void {
    if (visible) this.map.addLayer(this.groups[layer]);
    else this.map.removeLayer(this.groups[layer]);
  }

  recenter(pos: LatLng, zoom = 13): void {
    this.map.setView(pos, zoom);
  }

  showHighlight(model: HighlightModel): void {
    this.highlightGroup.clearLayers();
    for (const overlay of model.overlays) {
      if (overlay.line.length > 1) {
        this.highlightGroup.addLayer(L.polyline(overlay.line, EMPHASIS));
      }
      for (const pos of overlay.line) {
        this.highlightGroup.addLayer(
          L.circleMarker(pos, { ...EMPHASIS, radius: 5 }),
        );
      }
    }
  }

  clearHighlight(): void {
    this.highlightGroup.clearLayers();
  }

  /** Draw rings around specific features (e.g. q3's station result). */
  emphasizeFeatures(layer: LayerName, ids: Set<number>): void {
    this.emphasisGroup.clearLayers();
    const collection = this.data.get(layer);
    if (!collection) return;
    for (const feature of collection.features) {
      if (!ids.has(feature.id)) continue;
      const pos = featurePosition(feature);
      if (pos) {
        this.emphasisGroup.addLayer(
          L.circleMarker(pos, { ...EMPHASIS, radius: 9, fillOpacity: 0 }),
        );
      }
    }
  }

  private redraw(layer: LayerName): void {
    const group = this.groups[layer];
    group.clearLayers();
    const collection = this.data.get(layer);
    if (!collection) return;
    if (layer === "stations" || layer === "waternodes") {
      this.drawMarkers(layer, collection, group);
    } else {
      this.drawShapes(layer, collection, group);
    }
  }

  private drawMarkers(
    layer: LayerName,
    collection: FeatureCollection,
    group: L.LayerGroup,
  ): void {
    const style = LAYER_STYLE[layer];
    const points: MarkerPoint[] = [];
    const byId = new Map<number, Feature>();
    for (const feature of collection.features) {
      const pos = featurePosition(feature);
      if (!pos) continue;
      points.push({ id: feature.id, lon: pos[1], lat: pos[0] });
      byId.set(feature.id, feature);
    }
    const result = clusterMarkers(points);
    for (const cluster of result.clusters) {
      const pos: LatLng = [cluster.lat, cluster.lon];
      if (cluster.count === 1) {
        const feature = byId.get(cluster.ids[0]!)!;
        const marker = L.circleMarker(pos, style);
        marker.bindTooltip(String(feature.properties["id"] ?? feature.id));
        marker.on("click", () =>
          this.callbacks.onFeatureClick?.(layer, feature),
        );
        group.addLayer(marker);
      } else {
        const marker = L.circleMarker(pos, {
          ...style,
          radius: Math.min(18, 6 + Math.log2(cluster.count) * 2),
          fillOpacity: 0.5,
        });
        marker.bindTooltip(`${cluster.count} points`);
        marker.on("click", () => this.map.setView(pos, 12));
        group.addLayer(marker);
      }
    }
  }

  private drawShapes(
    layer: LayerName,
    collection: FeatureCollection,
    group: L.LayerGroup,
  ): void {
    const style = LAYER_STYLE[layer];
    for (const feature of collection.features) {
      const geom = feature.geometry;
      if (!geom) continue;
      const label = String(feature.properties["id"] ?? feature.id);
      if (geom.type === "LineString") {
        const line = L.polyline(
          geom.coordinates.map(([lon, lat]) => [lat, lon] as LatLng),
          style,
        );
        line.bindTooltip(label);
        line.on("click", () =>
          this.callbacks.onFeatureClick?.(layer, feature),
        );
        group.addLayer(line);
      } else if (geom.type === "Polygon") {
        group.addLayer(this.polygonLayer(geom.coordinates, style, label));
      } else if (geom.type === "MultiPolygon") {
        for (const rings of geom.coordinates) {
          group.addLayer(this.polygonLayer(rings, style, label));
        }
      }
    }
  }

  private polygonLayer(
    rings: [number, number][][],
    style: L.PathOptions,
    label: string,
  ): L.Polygon {
    const shape = L.polygon(
      rings.map((ring) => ring.map(([lon, lat]) => [lat, lon] as LatLng)),
      style,
    );
    shape.bindTooltip(label);
    return shape;
  }
}
