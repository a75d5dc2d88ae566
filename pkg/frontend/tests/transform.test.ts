import { describe, expect, it } from "vitest";

import { fitToData, pan, toData, toScreen, zoomAt,
         type Viewport } from "../src/transform.js";

const view: Viewport = { scale: 2.5, tx: 40, ty: -10 };

describe("viewport transform", () => {
  it("round-trips data through screen coordinates", () => {
    for (const [x, y] of [[0, 0], [3.5, -2.25], [-100, 42]]) {
      const [sx, sy] = toScreen(view, x, y);
      const [bx, by] = toData(view, sx, sy);
      expect(bx).toBeCloseTo(x, 10);
      expect(by).toBeCloseTo(y, 10);
    }
  });

  it("zoomAt keeps the anchor screen point fixed", () => {
    const anchorData: [number, number] = [7, -3];
    const [sx, sy] = toScreen(view, ...anchorData);
    const zoomed = zoomAt(view, sx, sy, 2.0);
    const [zx, zy] = toScreen(zoomed, ...anchorData);
    expect(zx).toBeCloseTo(sx, 9);
    expect(zy).toBeCloseTo(sy, 9);
    expect(zoomed.scale).toBeCloseTo(view.scale * 2.0);
  });

  it("pan shifts without rescaling", () => {
    const moved = pan(view, 5, -8);
    expect(moved.scale).toBe(view.scale);
    const [sx, sy] = toScreen(moved, 1, 1);
    const [ox, oy] = toScreen(view, 1, 1);
    expect(sx - ox).toBeCloseTo(5);
    expect(sy - oy).toBeCloseTo(-8);
  });

  it("fitToData frames all points inside the margin", () => {
    const xs = [-3, 0, 9];
    const ys = [5, -2, 1];
    const fitted = fitToData(xs, ys, 800, 600, 20);
    for (let i = 0; i < xs.length; i++) {
      const [sx, sy] = toScreen(fitted, xs[i], ys[i]);
      expect(sx).toBeGreaterThanOrEqual(20 - 1e-9);
      expect(sx).toBeLessThanOrEqual(800 - 20 + 1e-9);
      expect(sy).toBeGreaterThanOrEqual(20 - 1e-9);
      expect(sy).toBeLessThanOrEqual(600 - 20 + 1e-9);
    }
  });

  it("fitToData handles empty and degenerate inputs", () => {
    expect(fitToData([], [], 400, 300).scale).toBe(1);
    const single = fitToData([2], [3], 400, 300);
    expect(Number.isFinite(single.scale)).toBe(true);
  });
});
