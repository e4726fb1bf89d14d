import { describe, expect, it } from "vitest";

import { SeriesDto } from "../src/api.js";
import { buildChartModel, renderChart, toChartPoints } from "../src/chart.js";

function dto(points: [string, number, number | null][]): SeriesDto {
  return {
    station: "S1",
    parameter: "NO3_mg_L",
    points: points.map(([timestamp, value, depth]) => ({
      timestamp,
      value,
      below_detection: false,
      depth,
    })),
  };
}

const THREE_SAMPLES = dto([
  ["2024-01-01T00:00:00Z", 4.5, null],
  ["2024-02-01T00:00:00Z", 6.0, null],
  ["2024-03-01T00:00:00Z", 5.1, null],
]);

describe("buildChartModel", () => {
  it("flags an empty result instead of erroring", () => {
    const model = buildChartModel([], "line");
    expect(model.empty).toBe(true);
    expect(model.series).toHaveLength(0);
    const noPoints = buildChartModel(
      [{ station: "S1", parameter: "pH", points: [] }],
      "line",
    );
    expect(noPoints.empty).toBe(true);
  });

  it("plots a three-sample series as three points", () => {
    const model = buildChartModel([THREE_SAMPLES], "line");
    expect(model.empty).toBe(false);
    expect(model.pointCount).toBe(3);
    const points = model.series[0]!.points;
    expect(points).toHaveLength(3);
    for (const p of points) {
      expect(p.x).toBeGreaterThanOrEqual(0);
      expect(p.x).toBeLessThanOrEqual(1);
      expect(p.y).toBeGreaterThanOrEqual(0);
      expect(p.y).toBeLessThanOrEqual(1);
    }
    expect(points[0]!.x).toBe(0);
    expect(points[2]!.x).toBe(1);
    expect(points[1]!.y).toBe(1);
  });

  it("labels the time axis with dates", () => {
    const model = buildChartModel([THREE_SAMPLES], "line");
    expect(model.xTicks.length).toBeGreaterThan(0);
    for (const tick of model.xTicks) {
      expect(tick.label).toMatch(/^\d{4}-\d{2}-\d{2}$/);
    }
  });

  it("sizes bubbles by depth", () => {
    const model = buildChartModel(
      [
        dto([
          ["2024-01-01T00:00:00Z", 1.0, 0.0],
          ["2024-01-02T00:00:00Z", 2.0, 10.0],
          ["2024-01-03T00:00:00Z", 3.0, null],
        ]),
      ],
      "bubble",
    );
    const [shallow, deep, unknown] = model.series[0]!.points;
    expect(deep!.r).toBeGreaterThan(shallow!.r);
    expect(deep!.r).toBe(12);
    expect(unknown!.r).toBe(2);
  });

  it("uses a constant radius outside bubble mode", () => {
    const model = buildChartModel([THREE_SAMPLES], "line");
    expect(new Set(model.series[0]!.points.map((p) => p.r)).size).toBe(1);
  });

  it("anchors bars at zero", () => {
    const model = buildChartModel(
      [dto([["2024-01-01T00:00:00Z", 10, null],
            ["2024-01-02T00:00:00Z", 20, null]])],
      "bar",
    );
    const lows = model.yTicks.map((t) => t.label);
    expect(lows).toContain("0");
    expect(model.series[0]!.points[0]!.y).toBeCloseTo(0.5, 10);
  });

  it("decimates large series under the cap", () => {
    const big = dto(
      Array.from({ length: 10000 }, (_, i) => [
        new Date(Date.UTC(2024, 0, 1) + i * 60000).toISOString(),
        Math.sin(i / 10),
        null,
      ] as [string, number, null]),
    );
    const model = buildChartModel([big], "line", 500);
    expect(model.pointCount).toBeLessThanOrEqual(500);
    expect(model.pointCount).toBeGreaterThan(200);
  });

  it("carries the below-detection flag through", () => {
    const flagged: SeriesDto = {
      station: "S1",
      parameter: "NO3_mg_L",
      points: [
        {
          timestamp: "2024-01-01T00:00:00Z",
          value: 0.5,
          below_detection: true,
          depth: null,
        },
      ],
    };
    const model = buildChartModel([flagged], "line");
    expect(model.series[0]!.points[0]!.below).toBe(true);
  });
});

describe("toChartPoints", () => {
  it("parses timestamps into epoch milliseconds", () => {
    const [p] = toChartPoints(dto([["2024-01-01T00:00:00Z", 1, 2.5]]));
    expect(p!.t).toBe(Date.UTC(2024, 0, 1));
    expect(p!.depth).toBe(2.5);
  });
});

describe("renderChart", () => {
  it("no-ops without a 2d context", () => {
    const canvas = document.createElement("canvas");
    const model = buildChartModel([THREE_SAMPLES], "line");
    expect(() => renderChart(canvas, model)).not.toThrow();
  });
});
