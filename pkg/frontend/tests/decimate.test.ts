import { describe, expect, it } from "vitest";

import {
  ChartPoint,
  decimateSeries,
  MAX_CHART_POINTS,
} from "../src/decimate.js";

function series(n: number, value: (i: number) => number): ChartPoint[] {
  return Array.from({ length: n }, (_, i) => ({
    t: i * 1000,
    v: value(i),
    depth: null,
    below: false,
  }));
}

function mulberry(seed: number): () => number {
  let a = seed;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

describe("decimateSeries", () => {
  it("keeps short series untouched", () => {
    const points = series(100, (i) => Math.sin(i));
    expect(decimateSeries(points, 200)).toBe(points);
    expect(decimateSeries(points, 100)).toBe(points);
  });

  it("defaults to the 50000-point cap", () => {
    expect(MAX_CHART_POINTS).toBe(50000);
    const points = series(60000, (i) => i % 7);
    expect(decimateSeries(points).length).toBeLessThanOrEqual(
      MAX_CHART_POINTS,
    );
  });

  it("never exceeds the cap", () => {
    for (const n of [500, 1234, 9999]) {
      const out = decimateSeries(series(n, (i) => i), 200);
      expect(out.length).toBeLessThanOrEqual(200);
      expect(out.length).toBeGreaterThan(100);
    }
  });

  it("preserves the endpoints", () => {
    const points = series(5000, (i) => i * 2);
    const out = decimateSeries(points, 100);
    expect(out[0]).toBe(points[0]);
    expect(out[out.length - 1]).toBe(points[points.length - 1]);
  });

  it("preserves the global extremes", () => {
    const rand = mulberry(7);
    const points = series(20000, () => rand() * 100 - 50);
    const out = decimateSeries(points, 500);
    const vs = points.map((p) => p.v);
    const kept = out.map((p) => p.v);
    expect(Math.min(...kept)).toBe(Math.min(...vs));
    expect(Math.max(...kept)).toBe(Math.max(...vs));
  });

  it("keeps time non-decreasing", () => {
    const rand = mulberry(11);
    const points = series(10000, () => rand());
    const out = decimateSeries(points, 300);
    for (let i = 1; i < out.length; i += 1) {
      expect(out[i]!.t).toBeGreaterThanOrEqual(out[i - 1]!.t);
    }
  });

  it("retains the envelope within each bucket", () => {
    const points = series(10000, (i) => (i % 97 === 0 ? 500 : Math.sin(i)));
    const out = decimateSeries(points, 400);
    const spikes = out.filter((p) => p.v === 500).length;
    expect(spikes).toBeGreaterThan(50);
  });

  it("rejects unusable caps", () => {
    expect(() => decimateSeries(series(10, (i) => i), 3)).toThrow();
  });
});
