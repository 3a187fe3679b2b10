import { describe, expect, it } from "vitest";

import { CURVE_COLORS, heatColor, legendTicks, modeColor } from "../src/color.js";

describe("curve color convention", () => {
  it("matches the five-curve convention", () => {
    // black initial, green measurements, violet ms_as_sta, red pool, blue no_ms
    expect(CURVE_COLORS.initial).toBe("#000000");
    expect(CURVE_COLORS.measured).toBe("#1a8f1a");
    expect(CURVE_COLORS.ms_as_sta).toBe("#8a2be2");
    expect(CURVE_COLORS.pool).toBe("#d62728");
    expect(CURVE_COLORS.no_ms).toBe("#1f77b4");
  });

  it("modeColor falls back to grey for unknown labels", () => {
    expect(modeColor("pool")).toBe(CURVE_COLORS.pool);
    expect(modeColor("whatever" as never)).toBe("#666666");
  });
});

describe("heat scale", () => {
  it("is fixed: same value, same color, independent of data", () => {
    expect(heatColor(40, 80)).toBe(heatColor(40, 80));
  });

  it("clamps below zero and above max", () => {
    expect(heatColor(-10, 80)).toBe(heatColor(0, 80));
    expect(heatColor(999, 80)).toBe(heatColor(80, 80));
  });

  it("is monotone along the ramp", () => {
    // parse rgb() and check the red channel rises toward the hot end
    const red = (c: string) => Number(/rgb\((\d+),/.exec(c)?.[1]);
    expect(red(heatColor(75, 80))).toBeGreaterThan(red(heatColor(5, 80)));
  });

  it("legend ticks span 0..max inclusive", () => {
    expect(legendTicks(80)).toEqual([0, 16, 32, 48, 64, 80]);
  });
});
