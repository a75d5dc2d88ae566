import { describe, expect, it } from "vitest";

import { hoverCluster, layoutChart, renderChart } from "../src/evolution.js";
import type { EvolutionSeries } from "../src/types.js";
import { RecordingPathCanvas } from "./helpers.js";

const SERIES: EvolutionSeries[] = [
  { cluster: 0, total: 12, counts: { "2019": 4, "2020": 8 } },
  { cluster: 2, total: 6, counts: { "2019": 6, "2020": 0 } },
];

describe("evolution chart", () => {
  it("lays out one line per series across the year axis", () => {
    const layout = layoutChart(SERIES, 400, 200);
    expect(layout.lines).toHaveLength(2);
    expect(layout.years).toEqual([2019, 2020]);
    expect(layout.maxCount).toBe(8);
    for (const line of layout.lines) {
      expect(line.points).toHaveLength(2);
    }
  });

  it("scales counts into the chart box", () => {
    const layout = layoutChart(SERIES, 400, 200, 20);
    const yMax = layout.lines[0].points[1][1];   // 2020, count 8 = maxCount
    expect(yMax).toBeCloseTo(20);                // hits the top margin
    const yZero = layout.lines[1].points[1][1];  // 2020, count 0
    expect(yZero).toBeCloseTo(180);              // sits on the bottom margin
  });

  it("renders exactly one stroke per line", () => {
    const ctx = new RecordingPathCanvas();
    const layout = layoutChart(SERIES, 400, 200);
    const drawn = renderChart(ctx, 400, 200, layout);
    expect(drawn).toBe(2);
    expect(ctx.strokes).toBe(2);
  });

  it("thickens the hovered cluster's line", () => {
    const ctx = new RecordingPathCanvas();
    const layout = layoutChart(SERIES, 400, 200);
    renderChart(ctx, 400, 200, layout, 2);
    expect(ctx.strokes).toBe(2);
  });

  it("hover resolves to the nearest line's cluster", () => {
    const layout = layoutChart(SERIES, 400, 200);
    const [x, y] = layout.lines[1].points[0];
    expect(hoverCluster(layout, x + 2, y - 3)).toBe(2);
    expect(hoverCluster(layout, x + 200, y + 200)).toBeNull();
  });

  it("handles an empty series list", () => {
    const layout = layoutChart([], 400, 200);
    const ctx = new RecordingPathCanvas();
    expect(renderChart(ctx, 400, 200, layout)).toBe(0);
  });
});
