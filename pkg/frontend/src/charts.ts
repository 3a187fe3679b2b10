// Small canvas line/point charts: time series, 24-hour profiles, RMSE bars
// and the per-hour alpha/beta calibration view. No dependencies.

export interface Curve {
  label: string;
  color: string;
  values: (number | null)[];
  points?: boolean; // draw markers instead of a continuous line
  flagged?: boolean[]; // per-point degeneracy flag
}

export interface ChartLayout {
  xLabels?: string[];
  yUnit?: string;
}

const PAD = { left: 44, right: 8, top: 8, bottom: 22 };

function extent(curves: Curve[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const c of curves) {
    for (const v of c.values) {
      if (v === null) continue;
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  const margin = (hi - lo) * 0.08;
  return [Math.min(lo - margin, 0), hi + margin];
}

export function drawChart(
  canvas: HTMLCanvasElement,
  curves: Curve[],
  layout: ChartLayout = {},
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  const n = Math.max(...curves.map((c) => c.values.length), 2);
  const [lo, hi] = extent(curves);
  const plotW = w - PAD.left - PAD.right;
  const plotH = h - PAD.top - PAD.bottom;
  const px = (i: number) => PAD.left + (i / (n - 1)) * plotW;
  const py = (v: number) => PAD.top + (1 - (v - lo) / (hi - lo)) * plotH;

  // axes and y ticks
  ctx.strokeStyle = "#999";
  ctx.lineWidth = 1;
  ctx.strokeRect(PAD.left, PAD.top, plotW, plotH);
  ctx.fillStyle = "#444";
  ctx.font = "10px sans-serif";
  ctx.textAlign = "right";
  for (let i = 0; i <= 4; i++) {
    const v = lo + ((hi - lo) * i) / 4;
    ctx.fillText(v.toFixed(1), PAD.left - 4, py(v) + 3);
  }
  if (layout.yUnit) {
    ctx.save();
    ctx.translate(10, PAD.top + plotH / 2);
    ctx.rotate(-Math.PI / 2);
    ctx.textAlign = "center";
    ctx.fillText(layout.yUnit, 0, 0);
    ctx.restore();
  }
  if (layout.xLabels) {
    ctx.textAlign = "center";
    const step = Math.max(1, Math.ceil(layout.xLabels.length / 8));
    layout.xLabels.forEach((label, i) => {
      if (i % step === 0) ctx.fillText(label, px(i), h - 8);
    });
  }

  for (const curve of curves) {
    ctx.strokeStyle = curve.color;
    ctx.fillStyle = curve.color;
    ctx.lineWidth = 1.5;
    if (curve.points) {
      curve.values.forEach((v, i) => {
        if (v === null) return;
        ctx.beginPath();
        ctx.arc(px(i), py(v), 3, 0, 2 * Math.PI);
        ctx.fill();
        if (curve.flagged?.[i]) {
          ctx.strokeStyle = "#d62728";
          ctx.lineWidth = 2;
          ctx.beginPath();
          ctx.arc(px(i), py(v), 6, 0, 2 * Math.PI);
          ctx.stroke();
          ctx.strokeStyle = curve.color;
          ctx.lineWidth = 1.5;
        }
      });
      continue;
    }
    // gaps (nulls) break the line rather than reading as zeros
    let drawing = false;
    ctx.beginPath();
    curve.values.forEach((v, i) => {
      if (v === null) {
        drawing = false;
        return;
      }
      if (!drawing) {
        ctx.moveTo(px(i), py(v));
        drawing = true;
      } else {
        ctx.lineTo(px(i), py(v));
      }
    });
    ctx.stroke();
  }
}

export function renderLegend(el: HTMLElement, curves: Curve[]): void {
  el.innerHTML = "";
  for (const c of curves) {
    const item = document.createElement("span");
    item.className = "legend-item";
    const swatch = document.createElement("i");
    swatch.style.background = c.color;
    item.append(swatch, ` ${c.label}`);
    el.append(item);
  }
}
