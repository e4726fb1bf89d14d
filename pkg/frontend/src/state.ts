/**
 * Client-side state: panel layout, layer visibility, selection.
 *
 * Layout and visibility persist to storage and survive reloads; the
 * selection is session-only and pruned against the last-fetched layer
 * data so stale ids can never linger.
 */

export const PANELS = [
  "Console",
  "MapSearch",
  "Search",
  "Navbar",
  "MapSettings",
] as const;

export type PanelName = (typeof PANELS)[number];

export interface PanelRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export type PanelLayout = Record<PanelName, PanelRect>;

export const GRID_COLS = 12;
export const GRID_ROWS = 8;
const MIN_SPAN = 2;

export const DEFAULT_LAYOUT: PanelLayout = {
  Navbar: { x: 0, y: 0, w: 12, h: 1 },
  MapSearch: { x: 0, y: 1, w: 8, h: 5 },
  MapSettings: { x: 8, y: 1, w: 4, h: 2 },
  Search: { x: 8, y: 3, w: 4, h: 3 },
  Console: { x: 0, y: 6, w: 12, h: 2 },
};

function clampRect(rect: PanelRect): PanelRect {
  const w = Math.min(GRID_COLS, Math.max(1, Math.round(rect.w)));
  const h = Math.min(GRID_ROWS, Math.max(1, Math.round(rect.h)));
  return {
    x: Math.min(GRID_COLS - w, Math.max(0, Math.round(rect.x))),
    y: Math.min(GRID_ROWS - h, Math.max(0, Math.round(rect.y))),
    w,
    h,
  };
}

function isRect(value: unknown): value is PanelRect {
  if (typeof value !== "object" || value === null) return false;
  const r = value as Record<string, unknown>;
  return ["x", "y", "w", "h"].every(
    (k) => typeof r[k] === "number" && Number.isFinite(r[k] as number),
  );
}

/**
 * Coerce anything (old versions, corrupt storage, hand edits) into a valid
 * layout: every panel present exactly once, rects clamped to the grid.
 */
export function normalizeLayout(raw: unknown): PanelLayout {
  const source =
    typeof raw === "object" && raw !== null
      ? (raw as Record<string, unknown>)
      : {};
  const layout = {} as PanelLayout;
  for (const name of PANELS) {
    const candidate = source[name];
    layout[name] = isRect(candidate)
      ? clampRect(candidate)
      : { ...DEFAULT_LAYOUT[name] };
  }
  return layout;
}

export const LAYER_NAMES = [
  "watersheds",
  "landuse",
  "stretches",
  "waternodes",
  "stations",
] as const;

export type LayerName = (typeof LAYER_NAMES)[number];

export type LayerVisibility = Record<LayerName, boolean>;

const DEFAULT_VISIBILITY: LayerVisibility = {
  watersheds: true,
  landuse: true,
  stretches: true,
  waternodes: true,
  stations: true,
};

const LAYOUT_KEY = "hydrograph.layout";
const VISIBILITY_KEY = "hydrograph.layers";
const TOKEN_KEY = "hydrograph.token";

export class AppState {
  layout: PanelLayout;
  visibility: LayerVisibility;
  selection = new Set<number>();
  activePaths: number[][] = [];
  private knownIds = new Set<number>();

  constructor(private storage: Storage) {
    this.layout = normalizeLayout(readJson(storage, LAYOUT_KEY));
    this.visibility = {
      ...DEFAULT_VISIBILITY,
      ...filterBooleans(readJson(storage, VISIBILITY_KEY)),
    };
  }

  saveLayout(): void {
    this.storage.setItem(LAYOUT_KEY, JSON.stringify(this.layout));
  }

  movePanel(name: PanelName, dx: number, dy: number): void {
    const r = this.layout[name];
    this.layout[name] = clampRect({ ...r, x: r.x + dx, y: r.y + dy });
    this.saveLayout();
  }

  resizePanel(name: PanelName, dw: number, dh: number): void {
    const r = this.layout[name];
    this.layout[name] = clampRect({
      ...r,
      w: Math.max(MIN_SPAN, r.w + dw),
      h: Math.max(1, r.h + dh),
    });
    this.saveLayout();
  }

  setLayerVisible(layer: LayerName, visible: boolean): void {
    this.visibility[layer] = visible;
    this.storage.setItem(VISIBILITY_KEY, JSON.stringify(this.visibility));
  }

  /** Remember which ids exist so selections can be validated. */
  setKnownIds(ids: Iterable<number>): void {
    this.knownIds = new Set(ids);
    for (const id of [...this.selection]) {
      if (!this.knownIds.has(id)) this.selection.delete(id);
    }
  }

  select(id: number): boolean {
    if (!this.knownIds.has(id)) return false;
    this.selection.add(id);
    return true;
  }

  deselect(id: number): void {
    this.selection.delete(id);
  }

  clearSelection(): void {
    this.selection.clear();
  }

  setActivePaths(paths: number[][]): void {
    this.activePaths = paths;
  }

  get token(): string | null {
    return this.storage.getItem(TOKEN_KEY);
  }

  set token(value: string | null) {
    if (value === null) this.storage.removeItem(TOKEN_KEY);
    else this.storage.setItem(TOKEN_KEY, value);
  }

  /** Token expiry: drop credentials, keep layout and visibility intact. */
  handleAuthExpired(): void {
    this.token = null;
    this.selection.clear();
    this.activePaths = [];
  }
}

function readJson(storage: Storage, key: string): unknown {
  const text = storage.getItem(key);
  if (text === null) return null;
  try {
    return JSON.parse(text);
  } catch {
    return null;
  }
}

function filterBooleans(raw: unknown): Partial<LayerVisibility> {
  if (typeof raw !== "object" || raw === null) return {};
  const out: Partial<LayerVisibility> = {};
  for (const name of LAYER_NAMES) {
    const v = (raw as Record<string, unknown>)[name];
    if (typeof v === "boolean") out[name] = v;
  }
  return out;
}
