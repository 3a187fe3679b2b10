// Shared color mapping: one fixed scale across map modes so side-by-side
// comparison is meaningful. The max is analyst-adjustable.

import type { Mode } from "./types.js";

// Curve colors follow the fixed convention used throughout the app:
// black = initial map, green = measurements, violet = ms_as_sta,
// red = pool, blue = no_ms.
export const CURVE_COLORS: Record<string, string> = {
  initial: "#000000",
  measured: "#1a8f1a",
  ms_as_sta: "#8a2be2",
  pool: "#d62728",
  no_ms: "#1f77b4",
};

export function modeColor(mode: Mode | "measured"): string {
  return CURVE_COLORS[mode] ?? "#666666";
}

// Heatmap ramp stops, low to high concentration.
const RAMP: [number, number, number][] = [
  [13, 8, 135],
  [84, 2, 163],
  [156, 23, 158],
  [205, 62, 120],
  [237, 104, 83],
  [252, 166, 54],
  [240, 249, 33],
];

/** Map a concentration to an rgb() string on the fixed [0, max] scale. */
export function heatColor(value: number, max: number): string {
  const t = Math.min(1, Math.max(0, value / max));
  const pos = t * (RAMP.length - 1);
  const i = Math.min(RAMP.length - 2, Math.floor(pos));
  const f = pos - i;
  const mix = (a: number, b: number) => Math.round(a + (b - a) * f);
  const [r1, g1, b1] = RAMP[i];
  const [r2, g2, b2] = RAMP[i + 1];
  return `rgb(${mix(r1, r2)},${mix(g1, g2)},${mix(b1, b2)})`;
}

/** Legend tick values for the fixed scale. */
export function legendTicks(max: number, n = 5): number[] {
  const ticks: number[] = [];
  for (let i = 0; i <= n; i++) ticks.push((max * i) / n);
  return ticks;
}
