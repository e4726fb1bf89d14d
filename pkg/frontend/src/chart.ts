/**
 * Chart construction in two stages: a pure model (scales, normalized
 * point positions, tick labels) and a canvas painter.  The model is unit
 * testable without a rendering surface; the painter no-ops when the host
 * cannot supply a 2D context.
 */

import { ChartPoint, decimateSeries, MAX_CHART_POINTS } from "./decimate.js";
import { SeriesDto } from "./api.js";

export type ChartKind = "line" | "bar" | "bubble";

export interface ChartSeriesModel {
  label: string;
  /** Positions normalized to [0, 1] in both axes; radius in pixels. */
  points: { x: number; y: number; r: number; below: boolean }[];
}

export interface ChartTick {
  pos: number;
  label: string;
}

export interface ChartModel {
  kind: ChartKind;
  empty: boolean;
  series: ChartSeriesModel[];
  xTicks: ChartTick[];
  yTicks: ChartTick[];
  pointCount: number;
}

const BUBBLE_MIN_R = 2;
const BUBBLE_MAX_R = 12;

export function toChartPoints(dto: SeriesDto): ChartPoint[] {
  return dto.points.map((p) => ({
    t: Date.parse(p.timestamp),
    v: p.value,
    depth: p.depth,
    below: p.below_detection,
  }));
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step * 10, step * 5, step * 2, step];
  const chosen =
    candidates.find((s) => span / s >= count) ?? candidates[3]!;
  const ticks: number[] = [];
  for (
    let v = Math.ceil(lo / chosen) * chosen;
    v <= hi + chosen * 1e-9;
    v += chosen
  ) {
    ticks.push(v);
  }
  return ticks;
}

function formatTime(ms: number): string {
  return new Date(ms).toISOString().slice(0, 10);
}

function formatValue(v: number): string {
  if (v === 0) return "0";
  const magnitude = Math.abs(v);
  if (magnitude >= 1000 || magnitude < 0.01) return v.toExponential(1);
  return String(Number(v.toPrecision(3)));
}

export function buildChartModel(
  series: SeriesDto[],
  kind: ChartKind,
  cap: number = MAX_CHART_POINTS,
): ChartModel {
  const prepared = series
    .map((s) => ({
      label: `${s.station} ${s.parameter}`,
      points: decimateSeries(toChartPoints(s), cap),
    }))
    .filter((s) => s.points.length > 0);
  const pointCount = prepared.reduce((n, s) => n + s.points.length, 0);
  if (pointCount === 0) {
    return {
      kind,
      empty: true,
      series: [],
      xTicks: [],
      yTicks: [],
      pointCount: 0,
    };
  }

  let tLo = Infinity;
  let tHi = -Infinity;
  let vLo = Infinity;
  let vHi = -Infinity;
  let dHi = 0;
  for (const s of prepared) {
    for (const p of s.points) {
      if (p.t < tLo) tLo = p.t;
      if (p.t > tHi) tHi = p.t;
      if (p.v < vLo) vLo = p.v;
      if (p.v > vHi) vHi = p.v;
      if (p.depth !== null && p.depth > dHi) dHi = p.depth;
    }
  }
  if (vLo > 0 && kind === "bar") vLo = 0;
  const tSpan = tHi - tLo || 1;
  const vSpan = vHi - vLo || 1;

  const scaleX = (t: number) => (t - tLo) / tSpan;
  const scaleY = (v: number) => (v - vLo) / vSpan;
  const radius = (depth: number | null) => {
    if (kind !== "bubble") return 3;
    if (depth === null || dHi === 0) return BUBBLE_MIN_R;
    return BUBBLE_MIN_R + (BUBBLE_MAX_R - BUBBLE_MIN_R) * (depth / dHi);
  };

  return {
    kind,
    empty: false,
    pointCount,
    series: prepared.map((s) => ({
      label: s.label,
      points: s.points.map((p) => ({
        x: scaleX(p.t),
        y: scaleY(p.v),
        r: radius(p.depth),
        below: p.below,
      })),
    })),
    xTicks: niceTicks(tLo, tHi, 5).map((t) => ({
      pos: scaleX(t),
      label: formatTime(t),
    })),
    yTicks: niceTicks(vLo, vHi, 4).map((v) => ({
      pos: scaleY(v),
      label: formatValue(v),
    })),
  };
}

const SERIES_COLORS = ["#2274a5", "#e83f6f", "#32936f", "#ffbf00", "#6b4e71"];

export function renderChart(canvas: HTMLCanvasElement, model: ChartModel): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  if (model.empty) {
    ctx.fillStyle = "#666";
    ctx.font = "14px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("no data", width / 2, height / 2);
    return;
  }
  const pad = { left: 48, right: 12, top: 10, bottom: 22 };
  const plotW = width - pad.left - pad.right;
  const plotH = height - pad.top - pad.bottom;
  const px = (x: number) => pad.left + x * plotW;
  const py = (y: number) => pad.top + (1 - y) * plotH;

  ctx.strokeStyle = "#ddd";
  ctx.fillStyle = "#666";
  ctx.font = "11px sans-serif";
  for (const tick of model.yTicks) {
    const y = py(tick.pos);
    ctx.beginPath();
    ctx.moveTo(pad.left, y);
    ctx.lineTo(width - pad.right, y);
    ctx.stroke();
    ctx.textAlign = "right";
    ctx.fillText(tick.label, pad.left - 4, y + 3);
  }
  for (const tick of model.xTicks) {
    ctx.textAlign = "center";
    ctx.fillText(tick.label, px(tick.pos), height - 6);
  }

  model.series.forEach((s, i) => {
    const color = SERIES_COLORS[i % SERIES_COLORS.length]!;
    ctx.strokeStyle = color;
    ctx.fillStyle = color;
    if (model.kind === "line") {
      ctx.beginPath();
      s.points.forEach((p, j) => {
        if (j === 0) ctx.moveTo(px(p.x), py(p.y));
        else ctx.lineTo(px(p.x), py(p.y));
      });
      ctx.stroke();
    }
    for (const p of s.points) {
      if (model.kind === "bar") {
        const barW = Math.max(2, plotW / (s.points.length * 2));
        ctx.fillRect(px(p.x) - barW / 2, py(p.y), barW, py(0) - py(p.y));
      } else {
        ctx.globalAlpha = model.kind === "bubble" ? 0.6 : 1;
        ctx.beginPath();
        ctx.arc(px(p.x), py(p.y), p.r, 0, 2 * Math.PI);
        ctx.fill();
        ctx.globalAlpha = 1;
      }
    }
  });
}
