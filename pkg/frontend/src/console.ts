/**
 * Console panel: run path queries, list their results, plot filtered
 * series, and export the same filter as CSV.  Results are rendered as
 * clickable node chips; clicking one recenters the map, which is how one
 * query feeds the next.
 */

import { ApiClient, QueryKind, SeriesDto } from "./api.js";
import { buildChartModel, ChartKind, renderChart } from "./chart.js";
import { buildHighlight, NodeLocator } from "./highlight.js";

export interface ConsoleCallbacks {
  locate: NodeLocator;
  onHighlight: (paths: number[][]) => void;
  onEmphasizeStations: (ids: Set<number>) => void;
  onRecenter: (id: number) => void;
  onError: (message: string) => void;
}

export function mountConsole(
  body: HTMLElement,
  api: ApiClient,
  callbacks: ConsoleCallbacks,
): void {
  body.classList.add("console");

  const queryForm = document.createElement("form");
  queryForm.className = "query-form";
  queryForm.innerHTML = `
    <select name="kind" aria-label="query kind">
      <option value="q1">q1 trace sources</option>
      <option value="q2">q2 full paths through node</option>
      <option value="q3">q3 stations on shared flow path</option>
      <option value="q4">q4 stations in same watershed</option>
    </select>
    <input name="target" type="number" placeholder="target id" required>
    <button type="submit">run</button>
  `;
  body.appendChild(queryForm);

  const results = document.createElement("div");
  results.className = "query-results";
  body.appendChild(results);

  queryForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(queryForm);
    const kind = data.get("kind") as QueryKind;
    const target = Number(data.get("target"));
    void runQuery(kind, target);
  });

  async function runQuery(kind: QueryKind, target: number): Promise<void> {
    results.textContent = "";
    try {
      if (kind === "q1" || kind === "q2") {
        const { paths } = await api.runQuery(kind, target);
        callbacks.onHighlight(paths);
        renderPaths(paths);
      } else if (kind === "q3") {
        const { stations, paths } = await api.runQuery(kind, target);
        callbacks.onHighlight(paths);
        callbacks.onEmphasizeStations(new Set(stations));
        renderStations(stations);
        renderPaths(paths);
      } else {
        const { stations } = await api.runQuery(kind, target);
        callbacks.onEmphasizeStations(new Set(stations));
        renderStations(stations);
      }
    } catch (error) {
      callbacks.onError(`query ${kind} failed: ${describe(error)}`);
    }
  }

  function renderStations(stations: number[]): void {
    const heading = document.createElement("div");
    heading.className = "result-heading";
    heading.textContent = stations.length
      ? `${stations.length} station(s)`
      : "no stations";
    results.appendChild(heading);
    for (const id of stations) results.appendChild(nodeChip(id));
  }

  function renderPaths(paths: number[][]): void {
    const heading = document.createElement("div");
    heading.className = "result-heading";
    heading.textContent = paths.length
      ? `${paths.length} path(s)`
      : "no paths";
    results.appendChild(heading);
    const model = buildHighlight(paths, callbacks.locate);
    if (model.missing.length > 0) {
      const note = document.createElement("div");
      note.className = "result-note";
      note.textContent = `${model.missing.length} node(s) lack coordinates`;
      results.appendChild(note);
    }
    for (const path of paths) {
      const row = document.createElement("div");
      row.className = "result-path";
      for (const id of path) row.appendChild(nodeChip(id));
      results.appendChild(row);
    }
  }

  function nodeChip(id: number): HTMLElement {
    const chip = document.createElement("button");
    chip.type = "button";
    chip.className = "node-chip";
    chip.textContent = String(id);
    chip.addEventListener("click", () => callbacks.onRecenter(id));
    return chip;
  }

  const chartForm = document.createElement("form");
  chartForm.className = "chart-form";
  chartForm.innerHTML = `
    <input name="stations" placeholder="stations (comma separated)" required>
    <input name="params" placeholder="parameters (comma separated)" required>
    <input name="from" placeholder="from (ISO time)">
    <input name="to" placeholder="to (ISO time)">
    <select name="chartKind" aria-label="chart kind">
      <option value="line">time series</option>
      <option value="bar">bar</option>
      <option value="bubble">bubble (size = depth)</option>
    </select>
    <button type="submit">plot</button>
    <button type="button" name="export">export csv</button>
  `;
  body.appendChild(chartForm);

  const canvas = document.createElement("canvas");
  canvas.width = 640;
  canvas.height = 220;
  canvas.className = "chart-canvas";
  body.appendChild(canvas);

  const placeholder = document.createElement("div");
  placeholder.className = "chart-placeholder";
  placeholder.hidden = true;
  placeholder.textContent = "no data";
  body.appendChild(placeholder);

  function currentFilter() {
    const data = new FormData(chartForm);
    const list = (name: string) =>
      String(data.get(name) ?? "")
        .split(",")
        .map((s) => s.trim())
        .filter((s) => s.length > 0);
    const text = (name: string) => {
      const value = String(data.get(name) ?? "").trim();
      return value.length > 0 ? value : undefined;
    };
    return {
      stations: list("stations"),
      params: list("params"),
      from: text("from"),
      to: text("to"),
    };
  }

  chartForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const kind = new FormData(chartForm).get("chartKind") as ChartKind;
    void plot(kind);
  });

  async function plot(kind: ChartKind): Promise<void> {
    try {
      const { series } = await api.filterQuality(currentFilter());
      drawSeries(series, kind);
    } catch (error) {
      callbacks.onError(`plot failed: ${describe(error)}`);
    }
  }

  function drawSeries(series: SeriesDto[], kind: ChartKind): void {
    const model = buildChartModel(series, kind);
    placeholder.hidden = !model.empty;
    canvas.hidden = model.empty;
    renderChart(canvas, model);
  }

  const exportButton = chartForm.querySelector(
    'button[name="export"]',
  ) as HTMLButtonElement;
  exportButton.addEventListener("click", () => {
    void (async () => {
      try {
        const blob = await api.downloadExport(currentFilter());
        const url = URL.createObjectURL(blob);
        const link = document.createElement("a");
        link.href = url;
        link.download = "quality_export.csv";
        link.click();
        URL.revokeObjectURL(url);
      } catch (error) {
        callbacks.onError(`export failed: ${describe(error)}`);
      }
    })();
  });
}

function describe(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}
