// View state and its URL query-string round trip (deep-linkable views).

import type { Mode } from "./types.js";

export interface ViewState {
  device: string | null;
  slot: string;
  mode: Mode;
  learnUntil: string;
  paramMode: "hourly" | "global";
  zoning: "stations" | "all";
  avg24: boolean;
  clamp: boolean;
  scaleMax: number;
  fitId: number | null;
}

export const DEFAULT_STATE: ViewState = {
  device: null,
  slot: "",
  mode: "initial",
  learnUntil: "",
  paramMode: "hourly",
  zoning: "stations",
  avg24: false,
  clamp: false,
  scaleMax: 80,
  fitId: null,
};

const MODES: Mode[] = ["initial", "no_ms", "ms_as_sta", "pool"];

/** Serialize only the fields that differ from the defaults. */
export function stateToQuery(state: ViewState): string {
  const q = new URLSearchParams();
  if (state.device) q.set("device", state.device);
  if (state.slot) q.set("slot", state.slot);
  if (state.mode !== DEFAULT_STATE.mode) q.set("mode", state.mode);
  if (state.learnUntil) q.set("learn_until", state.learnUntil);
  if (state.paramMode !== DEFAULT_STATE.paramMode) q.set("param_mode", state.paramMode);
  if (state.zoning !== DEFAULT_STATE.zoning) q.set("zoning", state.zoning);
  if (state.avg24) q.set("avg24", "1");
  if (state.clamp) q.set("clamp", "1");
  if (state.scaleMax !== DEFAULT_STATE.scaleMax) q.set("scale", String(state.scaleMax));
  return q.toString();
}

export function stateFromQuery(query: string): ViewState {
  const q = new URLSearchParams(query);
  const state: ViewState = { ...DEFAULT_STATE };
  state.device = q.get("device");
  state.slot = q.get("slot") ?? "";
  const mode = q.get("mode");
  if (mode && MODES.includes(mode as Mode)) state.mode = mode as Mode;
  state.learnUntil = q.get("learn_until") ?? "";
  if (q.get("param_mode") === "global") state.paramMode = "global";
  if (q.get("zoning") === "all") state.zoning = "all";
  state.avg24 = q.get("avg24") === "1";
  state.clamp = q.get("clamp") === "1";
  const scale = Number(q.get("scale"));
  if (Number.isFinite(scale) && scale > 0) state.scaleMax = scale;
  return state;
}

/** Next hour-slot key after a "YYYY-MM-DDTHH" key, for slot stepping. */
export function stepSlot(key: string, delta: number): string {
  const m = /^(\d{4})-(\d{2})-(\d{2})T(\d{2})$/.exec(key);
  if (!m) return key;
  const date = new Date(Date.UTC(+m[1], +m[2] - 1, +m[3], +m[4]));
  date.setUTCHours(date.getUTCHours() + delta);
  const pad = (n: number) => String(n).padStart(2, "0");
  return (
    `${date.getUTCFullYear()}-${pad(date.getUTCMonth() + 1)}-` +
    `${pad(date.getUTCDate())}T${pad(date.getUTCHours())}`
  );
}
