/**
 * Ambient declarations for the slice of the Leaflet API this client uses.
 * Leaflet loads as a global script (see index.html), so there is no module
 * import; these types keep the map glue checkable without bundling.
 */

declare namespace L {
  type LatLngTuple = [number, number];

  interface LayerLike {
    addTo(target: Map | LayerGroup): this;
    remove(): void;
  }

  interface Evented {
    on(event: string, handler: (event: LeafletEvent) => void): this;
  }

  interface LeafletEvent {
    latlng?: { lat: number; lng: number };
  }

  interface Map extends Evented {
    setView(center: LatLngTuple, zoom: number): this;
    addLayer(layer: LayerLike | LayerGroup): this;
    removeLayer(layer: LayerLike | LayerGroup): this;
    fitBounds(bounds: LatLngTuple[]): this;
    invalidateSize(): this;
  }

  interface LayerGroup extends LayerLike {
    addLayer(layer: LayerLike): this;
    clearLayers(): this;
  }

  interface PathOptions {
    color?: string;
    weight?: number;
    opacity?: number;
    fillColor?: string;
    fillOpacity?: number;
    radius?: number;
  }

  interface CircleMarker extends LayerLike, Evented {
    bindTooltip(text: string): this;
    setStyle(options: PathOptions): this;
  }

  interface Polyline extends LayerLike, Evented {
    bindTooltip(text: string): this;
  }

  interface Polygon extends LayerLike, Evented {
    bindTooltip(text: string): this;
  }

  interface TileLayer extends LayerLike {}

  function map(element: HTMLElement | string, options?: object): Map;
  function tileLayer(url: string, options?: object): TileLayer;
  function layerGroup(): LayerGroup;
  function circleMarker(center: LatLngTuple, options?: PathOptions): CircleMarker;
  function polyline(points: LatLngTuple[], options?: PathOptions): Polyline;
  function polygon(rings: LatLngTuple[][], options?: PathOptions): Polygon;
}
