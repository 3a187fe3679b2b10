// Canvas heatmap with device markers. Stations are squares, sensors are
// circles; the selected device gets a highlight ring.

import { heatColor, legendTicks } from "./color.js";
import type { DeviceInfo, MapResponse } from "./types.js";

export interface HeatmapOptions {
  scaleMax: number;
  selected: string | null;
  onSelect: (id: string) => void;
}

interface Placed {
  id: string;
  px: number;
  py: number;
}

export class Heatmap {
  private placed: Placed[] = [];
  private options: HeatmapOptions | null = null;

  constructor(private canvas: HTMLCanvasElement) {
    canvas.addEventListener("click", (event) => this.handleClick(event));
  }

  render(map: MapResponse, devices: DeviceInfo[], options: HeatmapOptions): void {
    this.options = options;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { header, values } = map;
    const w = this.canvas.width;
    const h = this.canvas.height;
    const cellW = w / header.ncols;
    const cellH = h / header.nrows;
    ctx.clearRect(0, 0, w, h);

    for (let row = 0; row < header.nrows; row++) {
      for (let col = 0; col < header.ncols; col++) {
        const v = values[row][col];
        if (v === null) {
          ctx.fillStyle = "#d8d8d8";
        } else {
          ctx.fillStyle = heatColor(v, options.scaleMax);
        }
        ctx.fillRect(col * cellW, row * cellH, cellW + 1, cellH + 1);
      }
    }

    // device markers in grid coordinates
    const xmax = header.xllcorner + header.ncols * header.cellsize;
    const ymax = header.yllcorner + header.nrows * header.cellsize;
    this.placed = [];
    for (const d of devices) {
      if (d.x < header.xllcorner || d.x >= xmax) continue;
      if (d.y <= header.yllcorner || d.y > ymax) continue;
      const px = ((d.x - header.xllcorner) / (xmax - header.xllcorner)) * w;
      const py = ((ymax - d.y) / (ymax - header.yllcorner)) * h;
      this.placed.push({ id: d.id, px, py });
      ctx.lineWidth = 1.5;
      ctx.strokeStyle = "#ffffff";
      ctx.fillStyle = d.kind === "station" ? "#e63946" : "#1d4ed8";
      if (d.kind === "station") {
        ctx.fillRect(px - 5, py - 5, 10, 10);
        ctx.strokeRect(px - 5, py - 5, 10, 10);
      } else {
        ctx.beginPath();
        ctx.arc(px, py, 5, 0, 2 * Math.PI);
        ctx.fill();
        ctx.stroke();
      }
      if (d.id === options.selected) {
        ctx.strokeStyle = "#ffd60a";
        ctx.lineWidth = 2.5;
        ctx.beginPath();
        ctx.arc(px, py, 9, 0, 2 * Math.PI);
        ctx.stroke();
      }
    }
  }

  renderLegend(legend: HTMLElement, scaleMax: number): void {
    const ticks = legendTicks(scaleMax);
    legend.innerHTML = "";
    for (const t of ticks) {
      const item = document.createElement("span");
      item.className = "legend-item";
      const swatch = document.createElement("i");
      swatch.style.background = heatColor(t, scaleMax);
      item.append(swatch, ` ${t.toFixed(0)}`);
      legend.append(item);
    }
    const unit = document.createElement("span");
    unit.textContent = " µg/m³";
    legend.append(unit);
  }

  private handleClick(event: MouseEvent): void {
    if (!this.options) return;
    const rect = this.canvas.getBoundingClientRect();
    const x = ((event.clientX - rect.left) / rect.width) * this.canvas.width;
    const y = ((event.clientY - rect.top) / rect.height) * this.canvas.height;
    let best: Placed | null = null;
    let bestD = 12 * 12; // click tolerance in px^2
    for (const p of this.placed) {
      const d = (p.px - x) ** 2 + (p.py - y) ** 2;
      if (d < bestD) {
        bestD = d;
        best = p;
      }
    }
    if (best) this.options.onSelect(best.id);
  }
}
