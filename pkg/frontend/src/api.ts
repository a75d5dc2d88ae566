/** Data access: the live HTTP API or a static export directory.
 *
 * Both sources answer the same queries so the UI code is
 * transport-agnostic. The static source loads each exported file once and
 * derives filtered views locally, mirroring the server's semantics
 * (top-n ordering included).
 */

import type { CveDetail, EvolutionSeries, GraphPayload, Meta, Neighbor,
              Point } from "./types.js";

export interface DataSource {
  meta(): Promise<Meta>;
  points(overlay: string, year: number | "all", method: string): Promise<Point[]>;
  cve(id: string): Promise<CveDetail>;
  neighbors(id: string, k: number, space: string): Promise<Neighbor[]>;
  evolution(method: string, top: number): Promise<EvolutionSeries[]>;
  graph(threshold?: number): Promise<GraphPayload>;
}

type FetchLike = (url: string) => Promise<{ ok: boolean; status: number;
                                            json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(readonly status: number, readonly code: string) {
    super(`api error ${status}: ${code}`);
  }
}

export class HttpSource implements DataSource {
  constructor(private base: string,
              private fetchFn: FetchLike = fetch.bind(globalThis)) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    const body = (await response.json()) as T & {
      error?: { code: string };
    };
    if (!response.ok) {
      throw new ApiError(response.status, body.error?.code ?? "unknown");
    }
    return body;
  }

  meta(): Promise<Meta> {
    return this.get("/api/meta");
  }

  async points(overlay: string, year: number | "all",
               method: string): Promise<Point[]> {
    const params = new URLSearchParams({ overlay, method });
    if (year !== "all") params.set("year", String(year));
    const body = await this.get<{ points: Point[] }>(
      `/api/points?${params.toString()}`);
    return body.points;
  }

  cve(id: string): Promise<CveDetail> {
    return this.get(`/api/cve/${id}`);
  }

  async neighbors(id: string, k: number, space: string): Promise<Neighbor[]> {
    const body = await this.get<{ neighbors: Neighbor[] }>(
      `/api/neighbors/${id}?k=${k}&space=${space}`);
    return body.neighbors;
  }

  async evolution(method: string, top: number): Promise<EvolutionSeries[]> {
    const body = await this.get<{ series: EvolutionSeries[] }>(
      `/api/evolution?method=${method}&top=${top}`);
    return body.series;
  }

  graph(threshold?: number): Promise<GraphPayload> {
    const suffix = threshold === undefined ? "" : `?threshold=${threshold}`;
    return this.get(`/api/graph${suffix}`);
  }
}

interface StaticPoint {
  id: string;
  x: number;
  y: number;
  year: number;
  day_of_year: number;
  overlays: Record<string, string>;
  clusters: Record<string, string>;
}

type JsonLoader = (name: string) => Promise<unknown>;

export function fetchLoader(base: string,
                            fetchFn: FetchLike = fetch.bind(globalThis)): JsonLoader {
  return async (name: string) => {
    const response = await fetchFn(`${base}/${name}`);
    if (!response.ok) throw new ApiError(response.status, "static_file");
    return response.json();
  };
}

export class StaticSource implements DataSource {
  private cache = new Map<string, Promise<unknown>>();

  constructor(private load: JsonLoader) {}

  private file<T>(name: string): Promise<T> {
    let pending = this.cache.get(name);
    if (!pending) {
      pending = this.load(name);
      this.cache.set(name, pending);
    }
    return pending as Promise<T>;
  }

  meta(): Promise<Meta> {
    return this.file<Meta>("meta.json");
  }

  async points(overlay: string, year: number | "all",
               method: string): Promise<Point[]> {
    const body = await this.file<{ points: StaticPoint[] }>("points.json");
    const out: Point[] = [];
    for (const row of body.points) {
      if (year !== "all" && row.year !== year) continue;
      let value: string | undefined;
      if (overlay === "cluster") {
        value = row.clusters[method];
      } else {
        value = row.overlays[overlay];
      }
      if (value === undefined) {
        throw new ApiError(400, "bad_param");
      }
      out.push({ id: row.id, x: row.x, y: row.y, value });
    }
    return out;
  }

  async cve(id: string): Promise<CveDetail> {
    const body = await this.file<Record<string, CveDetail>>("cve.json");
    const hit = body[id];
    if (!hit) throw new ApiError(404, "unknown_id");
    return hit;
  }

  async neighbors(id: string, k: number, space: string): Promise<Neighbor[]> {
    const body = await this.file<{ k: number;
      spaces: Record<string, Record<string, Neighbor[]>> }>("neighbors.json");
    const per = body.spaces[space];
    if (!per) throw new ApiError(400, "bad_param");
    const hit = per[id];
    if (!hit) throw new ApiError(404, "unknown_id");
    return hit.slice(0, Math.min(k, body.k));
  }

  async evolution(method: string, top: number): Promise<EvolutionSeries[]> {
    const body = await this.file<Record<string, EvolutionSeries[]>>(
      "evolution.json");
    const series = body[method];
    if (!series) throw new ApiError(400, "bad_param");
    // largest totals first, ties to the lower cluster id (server semantics)
    return [...series]
      .sort((a, b) => b.total - a.total || a.cluster - b.cluster)
      .slice(0, top);
  }

  async graph(threshold?: number): Promise<GraphPayload> {
    const body = await this.file<GraphPayload>("graph.json");
    if (threshold === undefined) return body;
    return {
      ...body,
      threshold,
      edges: body.edges.filter((e) => e.probability >= threshold),
    };
  }
}
