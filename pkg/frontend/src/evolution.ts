/** Cluster-evolution line chart: one polyline per top-n cluster.
 *
 * Lines reuse the cluster overlay's categorical colors so hovering a line
 * and highlighting those points in the scatter reads as one linked view.
 */

import { CATEGORICAL } from "./palette.js";
import type { EvolutionSeries } from "./types.js";

export interface ChartLine {
  cluster: number;
  color: string;
  points: [number, number][];  // screen coordinates
}

export interface ChartLayout {
  lines: ChartLine[];
  years: number[];
  maxCount: number;
}

export function layoutChart(series: EvolutionSeries[], width: number,
                            height: number, margin = 28): ChartLayout {
  const years = [...new Set(series.flatMap((s) => Object.keys(s.counts)))]
    .map(Number).sort((a, b) => a - b);
  const maxCount = Math.max(1, ...series.flatMap(
    (s) => Object.values(s.counts)));
  const spanX = Math.max(years.length - 1, 1);
  const xFor = (index: number) =>
    margin + (index / spanX) * (width - 2 * margin);
  const yFor = (count: number) =>
    height - margin - (count / maxCount) * (height - 2 * margin);
  const lines = series.map((s) => ({
    cluster: s.cluster,
    color: CATEGORICAL[s.cluster % CATEGORICAL.length],
    points: years.map((year, index): [number, number] =>
      [xFor(index), yFor(s.counts[String(year)] ?? 0)]),
  }));
  return { lines, years, maxCount };
}

export interface PathCanvas {
  strokeStyle: string;
  lineWidth: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
}

export function renderChart(ctx: PathCanvas, width: number, height: number,
                            layout: ChartLayout,
                            hoveredCluster: number | null = null): number {
  ctx.clearRect(0, 0, width, height);
  let drawnLines = 0;
  for (const line of layout.lines) {
    ctx.strokeStyle = line.color;
    ctx.lineWidth = line.cluster === hoveredCluster ? 3 : 1.5;
    ctx.beginPath();
    line.points.forEach(([x, y], index) => {
      if (index === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    drawnLines += 1;
  }
  return drawnLines;
}

/** Cluster whose line passes closest to (sx, sy), within maxDistance. */
export function hoverCluster(layout: ChartLayout, sx: number, sy: number,
                             maxDistance = 10): number | null {
  let best: number | null = null;
  let bestD = maxDistance;
  for (const line of layout.lines) {
    for (const [x, y] of line.points) {
      const d = Math.hypot(x - sx, y - sy);
      if (d <= bestD) {
        bestD = d;
        best = line.cluster;
      }
    }
  }
  return best;
}
