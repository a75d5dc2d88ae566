/** Browser entry: wires the data source, state store, canvas scatter,
 * detail panel, and evolution chart together.
 *
 * Query parameters: ?api=http://host:port uses the live service;
 * ?static=path uses an export-static directory (default "./static").
 */

import { HttpSource, StaticSource, fetchLoader, type DataSource } from "./api.js";
import { layoutChart, renderChart, hoverCluster, type ChartLayout } from "./evolution.js";
import { makeColorScale } from "./palette.js";
import { renderPanelHtml } from "./panel.js";
import { pickPoint, renderScatter, DEFAULT_OPTIONS, type Canvas2D } from "./scatter.js";
import { StateStore } from "./state.js";
import { fitToData, pan, zoomAt, type Viewport } from "./transform.js";
import type { Meta, Point } from "./types.js";

const TOP_N = 8;

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function makeSource(): DataSource {
  const params = new URLSearchParams(window.location.search);
  const api = params.get("api");
  if (api) return new HttpSource(api);
  return new StaticSource(fetchLoader(params.get("static") ?? "./static"));
}

async function start(): Promise<void> {
  const source = makeSource();
  const meta: Meta = await source.meta();
  const store = new StateStore("cluster", meta.methods[0] ?? "");

  const canvas = element<HTMLCanvasElement>("scatter");
  const ctx = canvas.getContext("2d") as unknown as Canvas2D;
  const chartCanvas = element<HTMLCanvasElement>("evolution");
  const chartCtx = chartCanvas.getContext("2d")!;
  const panel = element<HTMLDivElement>("panel");
  const overlaySelect = element<HTMLSelectElement>("overlay");
  const methodSelect = element<HTMLSelectElement>("method");
  const yearSelect = element<HTMLSelectElement>("year");
  const status = element<HTMLSpanElement>("status");

  let points: Point[] = [];
  let view: Viewport = { scale: 1, tx: 0, ty: 0 };
  let chartLayout: ChartLayout = { lines: [], years: [], maxCount: 0 };
  let highlightValue: string | null = null;

  function fillSelect(select: HTMLSelectElement, values: string[],
                      current: string): void {
    select.innerHTML = values
      .map((v) => `<option value="${v}"${v === current ? " selected" : ""}>${v}</option>`)
      .join("");
  }

  function redraw(): void {
    const state = store.current;
    const scale = makeColorScale(state.overlay, points.map((p) => p.value));
    renderScatter(ctx, canvas.width, canvas.height, points, view, scale, {
      ...DEFAULT_OPTIONS,
      highlightValue,
      selectedId: state.selectedId,
    });
    renderChart(chartCtx as never, chartCanvas.width, chartCanvas.height,
                chartLayout,
                highlightValue === null ? null : Number(highlightValue));
  }

  async function refetchPoints(fit = false): Promise<void> {
    const state = store.current;
    status.textContent = "loading...";
    const fetched = await source.points(state.overlay, state.year, state.method);
    if (!store.isCurrent(state.version)) return;  // stale response
    points = fetched;
    if (fit) {
      view = fitToData(points.map((p) => p.x), points.map((p) => p.y),
                       canvas.width, canvas.height);
    }
    status.textContent = `${points.length} points`;
    redraw();
  }

  async function refetchEvolution(): Promise<void> {
    const state = store.current;
    const series = await source.evolution(state.method, TOP_N);
    if (!store.isCurrent(state.version)) return;
    chartLayout = layoutChart(series, chartCanvas.width, chartCanvas.height);
    redraw();
  }

  async function showSelection(id: string | null): Promise<void> {
    if (id === null) {
      panel.innerHTML = "<p>click a point</p>";
      return;
    }
    const state = store.current;
    const [detail, neighbors] = await Promise.all([
      source.cve(id),
      source.neighbors(id, state.neighborK, meta.spaces[0] ?? "raw"),
    ]);
    if (!store.isCurrent(state.version)) return;
    panel.innerHTML = renderPanelHtml(detail, neighbors);
  }

  fillSelect(overlaySelect, store.availableOverlays(meta.overlays), "cluster");
  fillSelect(methodSelect, meta.methods, store.current.method);
  fillSelect(yearSelect, ["all", ...meta.years.map(String)], "all");

  overlaySelect.addEventListener("change", () => {
    store.setOverlay(overlaySelect.value);
    void refetchPoints();
  });
  methodSelect.addEventListener("change", () => {
    store.setMethod(methodSelect.value);
    void refetchPoints();
    void refetchEvolution();
  });
  yearSelect.addEventListener("change", () => {
    const value = yearSelect.value === "all" ? "all" : Number(yearSelect.value);
    const state = store.setYear(value);
    fillSelect(overlaySelect, store.availableOverlays(meta.overlays),
               state.overlay);
    void refetchPoints();
  });

  canvas.addEventListener("click", (event) => {
    const rect = canvas.getBoundingClientRect();
    const hit = pickPoint(points, view, event.clientX - rect.left,
                          event.clientY - rect.top);
    const state = store.select(hit ? hit.id : null);
    void showSelection(state.selectedId);
    redraw();
  });
  canvas.addEventListener("wheel", (event) => {
    event.preventDefault();
    const rect = canvas.getBoundingClientRect();
    const factor = event.deltaY < 0 ? 1.15 : 1 / 1.15;
    view = zoomAt(view, event.clientX - rect.left, event.clientY - rect.top,
                  factor);
    redraw();
  });
  let dragging: [number, number] | null = null;
  canvas.addEventListener("mousedown", (event) => {
    dragging = [event.clientX, event.clientY];
  });
  window.addEventListener("mouseup", () => { dragging = null; });
  window.addEventListener("mousemove", (event) => {
    if (!dragging) return;
    view = pan(view, event.clientX - dragging[0], event.clientY - dragging[1]);
    dragging = [event.clientX, event.clientY];
    redraw();
  });

  chartCanvas.addEventListener("mousemove", (event) => {
    const rect = chartCanvas.getBoundingClientRect();
    const cluster = hoverCluster(chartLayout, event.clientX - rect.left,
                                 event.clientY - rect.top);
    const next = cluster === null ? null : String(cluster);
    if (next !== highlightValue) {
      highlightValue = next;
      redraw();
    }
  });
  chartCanvas.addEventListener("mouseleave", () => {
    highlightValue = null;
    redraw();
  });

  panel.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains("neighbor")) {
      event.preventDefault();
      const id = target.dataset.id!;
      store.select(id);
      void showSelection(id);
      redraw();
    }
  });

  await refetchPoints(true);
  await refetchEvolution();
  await showSelection(null);
}

start().catch((error) => {
  console.error(error);
  const status = document.getElementById("status");
  if (status) status.textContent = String(error);
});
