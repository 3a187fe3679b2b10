// Application wiring: one ViewState drives every panel; panels refresh
// together so nothing mixes data from two fit ids.

import { api, ApiError } from "./api.js";
import { drawChart, renderLegend, type Curve } from "./charts.js";
import { CURVE_COLORS, modeColor } from "./color.js";
import { Heatmap } from "./heatmap.js";
import { FitGate, pollUntilDone } from "./poll.js";
import { DEFAULT_STATE, stateFromQuery, stateToQuery, stepSlot, type ViewState } from "./state.js";
import { CORRECTED_MODES, type DeviceInfo, type Mode } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const state: ViewState = stateFromQuery(location.search);
let devices: DeviceInfo[] = [];
const gate = new FitGate();
let refreshAbort: AbortController | null = null;

const heatmap = new Heatmap(el<HTMLCanvasElement>("map-canvas"));

function pushState(): void {
  const query = stateToQuery(state);
  history.replaceState(null, "", query ? `?${query}` : location.pathname);
}

function banner(message: string | null): void {
  const node = el("banner");
  node.textContent = message ?? "";
  node.style.display = message ? "block" : "none";
}

function setFitId(fitId: number | null): void {
  state.fitId = fitId;
  el("fit-id").textContent = fitId === null ? "no fit" : `fit #${fitId}`;
}

function fmt(v: number | null | undefined, digits = 3): string {
  return v === null || v === undefined ? "-" : v.toFixed(digits);
}

async function refreshMap(signal: AbortSignal): Promise<void> {
  if (!state.slot) return;
  const map = await api.map(state.slot, state.mode, state.clamp, signal);
  heatmap.render(map, devices, {
    scaleMax: state.scaleMax,
    selected: state.device,
    onSelect: (id) => {
      state.device = id;
      pushState();
      void refreshAll();
    },
  });
  heatmap.renderLegend(el("map-legend"), state.scaleMax);
  el("map-title").textContent =
    `${state.mode} map, ${state.slot} (µg/m³, ` +
    `${map.fit_id === null ? "no fit" : `fit #${map.fit_id}`})`;
}

async function refreshParameters(signal: AbortSignal): Promise<void> {
  const panel = el("param-body");
  const chartWrap = el("calib-wrap");
  if (!state.device) {
    panel.textContent = "click a device on the map";
    chartWrap.style.display = "none";
    return;
  }
  const strategy = state.mode === "initial" ? "pool" : state.mode;
  let doc;
  try {
    doc = await api.parameters(state.device, strategy, signal);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      panel.textContent = "no fit yet";
      chartWrap.style.display = "none";
      return;
    }
    throw err;
  }
  const rows = doc.parameters.map((p) => {
    const hour = p.hour === null ? "all" : String(p.hour).padStart(2, "0");
    const flags = [...p.flags, ...(p.sensor_flags ?? [])];
    const alpha = p.alpha !== undefined ? ` α=${fmt(p.alpha)} β=${fmt(p.beta)}` : "";
    const mark = flags.length ? ` ⚠ ${flags.join(",")}` : "";
    return (
      `h${hour} zone ${p.zone}: C=${fmt(p.C)} µg/m³ ρ=${fmt(p.rho)} ` +
      `σ²=${fmt(p.sigma2, 2)}${alpha}${mark}`
    );
  });
  panel.textContent = `${doc.device} (${doc.kind}, ${strategy}, fit #${doc.fit_id})\n` + rows.join("\n");

  // per-hour alpha/beta chart, sensors only (hidden for stations)
  if (doc.kind === "sensor" && doc.parameters.some((p) => p.alpha !== undefined)) {
    chartWrap.style.display = "block";
    const flagged = doc.parameters.map(
      (p) => (p.sensor_flags ?? []).length > 0 || p.flags.length > 0,
    );
    const curves: Curve[] = [
      {
        label: "α (gain)",
        color: "#0a7",
        points: true,
        flagged,
        values: doc.parameters.map((p) => p.alpha ?? null),
      },
      {
        label: "β (offset, µg/m³)",
        color: "#a70",
        points: true,
        flagged,
        values: doc.parameters.map((p) => p.beta ?? null),
      },
    ];
    drawChart(el<HTMLCanvasElement>("calib-canvas"), curves, {
      xLabels: doc.parameters.map((p) => (p.hour === null ? "all" : String(p.hour))),
    });
    renderLegend(el("calib-legend"), curves);
  } else {
    chartWrap.style.display = "none";
  }
}

async function refreshSeries(signal: AbortSignal): Promise<void> {
  if (!state.device) return;
  const mode = state.mode === "initial" ? "pool" : state.mode;
  const doc = await api.series(state.device, mode, state.avg24, signal);
  const curves: Curve[] = [
    { label: "measurements", color: CURVE_COLORS.measured, values: doc.measured },
    { label: "initial map", color: CURVE_COLORS.initial, values: doc.initial },
    { label: mode, color: modeColor(mode as Mode), values: doc.corrected },
  ];
  const labels = doc.avg24
    ? (doc.hours ?? []).map(String)
    : (doc.slots ?? []).map((s) => s.slice(5));
  drawChart(el<HTMLCanvasElement>("series-canvas"), curves, {
    xLabels: labels,
    yUnit: "µg/m³",
  });
  renderLegend(el("series-legend"), curves);
  el("series-title").textContent =
    `${doc.device} series (${doc.avg24 ? "24-h profile" : "full period"}, ` +
    `${doc.fit_id === null ? "no fit" : `fit #${doc.fit_id}`})`;
}

async function refreshRmse(signal: AbortSignal): Promise<void> {
  const wrap = el("rmse-wrap");
  try {
    const strategies = ["initial", ...CORRECTED_MODES];
    const docs = await Promise.all(strategies.map((s) => api.rmse("hour", s, signal)));
    const curves: Curve[] = docs.map((doc, i) => ({
      label: strategies[i],
      color: modeColor(strategies[i] as Mode),
      values: doc.values,
    }));
    drawChart(el<HTMLCanvasElement>("rmse-canvas"), curves, {
      xLabels: docs[0].keys,
      yUnit: "RMSE µg/m³",
    });
    renderLegend(el("rmse-legend"), curves);
    el("rmse-title").textContent = `test-period RMSE by hour (fit #${docs[0].fit_id})`;
    wrap.style.display = "block";
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      wrap.style.display = "none";
      return;
    }
    throw err;
  }
}

async function refreshAll(): Promise<void> {
  refreshAbort?.abort();
  refreshAbort = new AbortController();
  const signal = refreshAbort.signal;
  banner(null);
  try {
    const status = await api.fitStatus(signal);
    setFitId(status.fit_id);
    await refreshMap(signal);
    await Promise.all([
      refreshParameters(signal),
      refreshSeries(signal),
      refreshRmse(signal),
    ]);
  } catch (err) {
    if ((err as Error).name === "AbortError") return;
    banner(`error: ${(err as Error).message}`);
  }
}

async function runFit(): Promise<void> {
  const button = el<HTMLButtonElement>("fit-button");
  await gate.run(async () => {
    button.disabled = true;
    el("fit-status").textContent = "fitting…";
    try {
      await api.startFit({
        learn_until: state.learnUntil,
        param_mode: state.paramMode,
        zoning: state.zoning,
      });
      const final = await pollUntilDone({ fetchStatus: () => api.fitStatus() });
      if (final.status === "failed") {
        el("fit-status").textContent = "failed";
        banner(`fit failed: ${final.error}`);
      } else {
        el("fit-status").textContent = "done";
        setFitId(final.fit_id);
        await refreshAll();
      }
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        el("fit-status").textContent = "fit in progress";
      } else {
        el("fit-status").textContent = "error";
        banner(`fit request failed: ${(err as Error).message}`);
      }
    } finally {
      button.disabled = false;
    }
  });
}

function bindControls(): void {
  const slotInput = el<HTMLInputElement>("slot-input");
  slotInput.value = state.slot;
  slotInput.addEventListener("change", () => {
    state.slot = slotInput.value;
    pushState();
    void refreshAll();
  });
  el("slot-prev").addEventListener("click", () => {
    state.slot = stepSlot(state.slot, -1);
    slotInput.value = state.slot;
    pushState();
    void refreshAll();
  });
  el("slot-next").addEventListener("click", () => {
    state.slot = stepSlot(state.slot, 1);
    slotInput.value = state.slot;
    pushState();
    void refreshAll();
  });

  const modeSelect = el<HTMLSelectElement>("mode-select");
  modeSelect.value = state.mode;
  modeSelect.addEventListener("change", () => {
    state.mode = modeSelect.value as Mode;
    pushState();
    void refreshAll();
  });

  const clampBox = el<HTMLInputElement>("clamp-box");
  clampBox.checked = state.clamp;
  clampBox.addEventListener("change", () => {
    state.clamp = clampBox.checked;
    pushState();
    void refreshAll();
  });

  const avgBox = el<HTMLInputElement>("avg24-box");
  avgBox.checked = state.avg24;
  avgBox.addEventListener("change", () => {
    state.avg24 = avgBox.checked;
    pushState();
    void refreshAll();
  });

  const scaleInput = el<HTMLInputElement>("scale-input");
  scaleInput.value = String(state.scaleMax);
  scaleInput.addEventListener("change", () => {
    const v = Number(scaleInput.value);
    if (Number.isFinite(v) && v > 0) {
      state.scaleMax = v;
      pushState();
      void refreshAll();
    }
  });

  const learnInput = el<HTMLInputElement>("learn-input");
  learnInput.value = state.learnUntil;
  learnInput.addEventListener("change", () => {
    state.learnUntil = learnInput.value;
    pushState();
  });

  const pmSelect = el<HTMLSelectElement>("param-mode-select");
  pmSelect.value = state.paramMode;
  pmSelect.addEventListener("change", () => {
    state.paramMode = pmSelect.value as "hourly" | "global";
    pushState();
  });

  const zoningSelect = el<HTMLSelectElement>("zoning-select");
  zoningSelect.value = state.zoning;
  zoningSelect.addEventListener("change", () => {
    state.zoning = zoningSelect.value as "stations" | "all";
    pushState();
  });

  el("fit-button").addEventListener("click", () => void runFit());
}

async function boot(): Promise<void> {
  bindControls();
  try {
    const doc = await api.devices();
    devices = doc.devices;
    setFitId(doc.fit_id);
  } catch (err) {
    banner(`cannot reach server: ${(err as Error).message}`);
    return;
  }
  if (!state.slot) {
    // a sensible default: the analyst sets the real one from the URL/input
    state.slot = DEFAULT_STATE.slot;
  }
  await refreshAll();
}

void boot();
