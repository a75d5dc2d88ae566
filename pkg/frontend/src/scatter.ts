/** Canvas scatter rendering and point picking.
 *
 * Points draw as small squares through a minimal context interface, so
 * tests can count draw calls with a recording stub instead of a browser
 * canvas. Analytic values are never mutated here; rendering is a pure
 * view of the fetched points.
 */

import type { ColorScale } from "./palette.js";
import type { Point } from "./types.js";
import { toScreen, type Viewport } from "./transform.js";

export interface Canvas2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
}

export interface ScatterOptions {
  pointSize: number;
  background: string;
  highlightValue: string | null;   // e.g. a hovered cluster id
  selectedId: string | null;
}

export const DEFAULT_OPTIONS: ScatterOptions = {
  pointSize: 4,
  background: "#1c1c1e",
  highlightValue: null,
  selectedId: null,
};

export interface RenderStats {
  drawn: number;
  highlighted: number;
}

export function renderScatter(ctx: Canvas2D, width: number, height: number,
                              points: Point[], view: Viewport,
                              scale: ColorScale,
                              options: ScatterOptions = DEFAULT_OPTIONS): RenderStats {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = options.background;
  ctx.fillRect(0, 0, width, height);
  const size = options.pointSize;
  const half = size / 2;
  let drawn = 0;
  let highlighted = 0;
  for (const point of points) {
    const [sx, sy] = toScreen(view, point.x, point.y);
    if (sx < -size || sy < -size || sx > width + size || sy > height + size) {
      continue;
    }
    const emphasized = options.highlightValue !== null &&
      point.value === options.highlightValue;
    ctx.fillStyle = scale.color(point.value);
    const grow = emphasized ? 2 : 0;
    ctx.fillRect(sx - half - grow / 2, sy - half - grow / 2,
                 size + grow, size + grow);
    drawn += 1;
    if (emphasized) highlighted += 1;
    if (options.selectedId !== null && point.id === options.selectedId) {
      ctx.strokeStyle = "#ffffff";
      ctx.lineWidth = 2;
      ctx.strokeRect(sx - half - 3, sy - half - 3, size + 6, size + 6);
    }
  }
  return { drawn, highlighted };
}

/** Nearest rendered point within pickRadius screen pixels, or null. */
export function pickPoint(points: Point[], view: Viewport, sx: number,
                          sy: number, pickRadius = 8): Point | null {
  let best: Point | null = null;
  let bestD2 = pickRadius * pickRadius;
  for (const point of points) {
    const [px, py] = toScreen(view, point.x, point.y);
    const d2 = (px - sx) * (px - sx) + (py - sy) * (py - sy);
    if (d2 <= bestD2) {
      bestD2 = d2;
      best = point;
    }
  }
  return best;
}
