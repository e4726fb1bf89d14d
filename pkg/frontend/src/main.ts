/**
 * Application boot: restore state, authenticate, fetch layers, wire the
 * panels together.  All data flows from the HTTP API; navigation cancels
 * in-flight fetches through the client's abort groups.
 */

import { ApiClient, Feature, FeatureCollection, LayerResource } from "./api.js";
import { showBanner } from "./banners.js";
import { mountConsole } from "./console.js";
import { buildHighlight, locatorFromLayers } from "./highlight.js";
import { MapView } from "./map.js";
import { mountPanels } from "./panels.js";
import { AppState, LAYER_NAMES, LayerName } from "./state.js";

const state = new AppState(window.localStorage);
const api = new ApiClient("", undefined, () => {
  state.handleAuthExpired();
  showLogin();
});
api.token = state.token;

const banners = document.createElement("div");
banners.className = "banners";
document.body.appendChild(banners);

const root = document.getElementById("app")!;
const panels = mountPanels(root, state);

const layerData = new Map<LayerName, FeatureCollection>();
let mapView: MapView | null = null;
let locate = locatorFromLayers([]);

function fail(message: string): void {
  showBanner(banners, message);
}

// --- login overlay ----------------------------------------------------------

const loginOverlay = document.createElement("div");
loginOverlay.className = "login-overlay";
loginOverlay.innerHTML = `
  <form class="login-form">
    <h1>hydrograph</h1>
    <input name="username" placeholder="username" autocomplete="username" required>
    <input name="password" type="password" placeholder="password"
           autocomplete="current-password" required>
    <button type="submit">sign in</button>
  </form>
`;
document.body.appendChild(loginOverlay);

function showLogin(): void {
  loginOverlay.hidden = false;
}

function hideLogin(): void {
  loginOverlay.hidden = true;
}

loginOverlay.querySelector("form")!.addEventListener("submit", (event) => {
  event.preventDefault();
  const data = new FormData(event.target as HTMLFormElement);
  void (async () => {
    try {
      await api.login(String(data.get("username")), String(data.get("password")));
      state.token = api.token;
      hideLogin();
      await loadAll();
    } catch (error) {
      fail(`login failed: ${error instanceof Error ? error.message : error}`);
    }
  })();
});

// --- map + settings ---------------------------------------------------------

function ensureMap(): MapView {
  if (!mapView) {
    const host = document.createElement("div");
    host.className = "map-host";
    panels.MapSearch.body.appendChild(host);
    mapView = new MapView(host, {
      onFeatureClick: (_layer, feature) => {
        state.select(feature.id);
      },
    });
    for (const layer of LAYER_NAMES) {
      mapView.setLayerVisible(layer, state.visibility[layer]);
    }
  }
  return mapView;
}

function mountSettings(): void {
  const body = panels.MapSettings.body;
  body.textContent = "";
  for (const layer of LAYER_NAMES) {
    const row = document.createElement("label");
    row.className = "layer-toggle";
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = state.visibility[layer];
    box.addEventListener("change", () => {
      state.setLayerVisible(layer, box.checked);
      ensureMap().setLayerVisible(layer, box.checked);
    });
    row.appendChild(box);
    row.appendChild(document.createTextNode(` ${layer}`));
    body.appendChild(row);
  }
}

// --- search panel -----------------------------------------------------------

function mountSearch(): void {
  const body = panels.Search.body;
  body.textContent = "";
  const input = document.createElement("input");
  input.placeholder = "find station or node";
  body.appendChild(input);
  const list = document.createElement("div");
  list.className = "search-results";
  body.appendChild(list);

  input.addEventListener("input", () => {
    list.textContent = "";
    const needle = input.value.trim().toLowerCase();
    if (!needle) return;
    const pool: [LayerName, Feature][] = [];
    for (const layer of ["stations", "waternodes"] as LayerName[]) {
      for (const feature of layerData.get(layer)?.features ?? []) {
        pool.push([layer, feature]);
      }
    }
    const matches = pool
      .filter(([, f]) => {
        const id = String(f.properties["id"] ?? "").toLowerCase();
        const name = String(f.properties["name"] ?? "").toLowerCase();
        return id.includes(needle) || name.includes(needle);
      })
      .slice(0, 20);
    for (const [, feature] of matches) {
      const row = document.createElement("button");
      row.type = "button";
      row.className = "search-hit";
      row.textContent = String(feature.properties["id"] ?? feature.id);
      row.addEventListener("click", () => {
        state.select(feature.id);
        const pos = locate(feature.id);
        if (pos) ensureMap().recenter(pos);
      });
      list.appendChild(row);
    }
  });
}

// --- navbar -----------------------------------------------------------------

function mountNavbar(): void {
  const body = panels.Navbar.body;
  body.textContent = "";
  body.classList.add("navbar");

  const summary = document.createElement("span");
  summary.className = "navbar-summary";
  body.appendChild(summary);

  const fileInput = document.createElement("input");
  fileInput.type = "file";
  body.appendChild(fileInput);

  const uploadButton = document.createElement("button");
  uploadButton.textContent = "upload";
  uploadButton.addEventListener("click", () => {
    const file = fileInput.files?.[0];
    if (!file) {
      fail("choose a file first");
      return;
    }
    void (async () => {
      try {
        const report = await api.upload(file.name, file);
        summary.textContent =
          `${report.kind}: +${report.nodes_created} nodes, ` +
          `+${report.edges_created} edges, ${report.rows_skipped} skipped`;
        await loadAll();
      } catch (error) {
        fail(`upload failed: ${error instanceof Error ? error.message : error}`);
      }
    })();
  });
  body.appendChild(uploadButton);

  const logout = document.createElement("button");
  logout.textContent = "sign out";
  logout.addEventListener("click", () => {
    state.handleAuthExpired();
    api.token = null;
    showLogin();
  });
  body.appendChild(logout);
}

// --- data loading -----------------------------------------------------------

const LAYER_RESOURCES: Record<LayerName, LayerResource> = {
  watersheds: "watersheds",
  landuse: "landuse",
  stretches: "stretches",
  waternodes: "waternodes",
  stations: "stations",
};

async function loadAll(): Promise<void> {
  api.cancelGroup("layers");
  const view = ensureMap();
  await Promise.all(
    LAYER_NAMES.map(async (layer) => {
      try {
        const collection = await api.listLayer(LAYER_RESOURCES[layer], "layers");
        layerData.set(layer, collection);
        view.setLayerData(layer, collection);
      } catch (error) {
        if ((error as Error).name === "AbortError") return;
        fail(`loading ${layer} failed: ${
          error instanceof Error ? error.message : error}`);
      }
    }),
  );
  locate = locatorFromLayers([...layerData.values()]);
  const selectable: number[] = [];
  for (const layer of ["stations", "waternodes"] as LayerName[]) {
    for (const feature of layerData.get(layer)?.features ?? []) {
      selectable.push(feature.id);
    }
  }
  state.setKnownIds(selectable);
}

// --- console ----------------------------------------------------------------

mountConsole(panels.Console.body, api, {
  locate: (id) => locate(id),
  onHighlight: (paths) => {
    state.setActivePaths(paths);
    ensureMap().showHighlight(buildHighlight(paths, (id) => locate(id)));
  },
  onEmphasizeStations: (ids) => ensureMap().emphasizeFeatures("stations", ids),
  onRecenter: (id) => {
    const pos = locate(id);
    if (pos) ensureMap().recenter(pos);
  },
  onError: fail,
});

mountSettings();
mountSearch();
mountNavbar();

if (api.token) {
  hideLogin();
  void loadAll();
} else {
  showLogin();
}
