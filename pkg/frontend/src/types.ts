/** Payload shapes served by the analysis API (live or static export). */

export interface Meta {
  rows: number;
  years: number[];
  overlays: string[];
  methods: string[];
  spaces: string[];
  counts: { by_year: Record<string, number> };
  has_graph: boolean;
}

export interface Point {
  id: string;
  x: number;
  y: number;
  value: string;
}

export interface CveDetail {
  id: string;
  published: string;
  year: number;
  day_of_year: number;
  description: string;
  cwes: string[];
  cpes: string[][];
  labels: Record<string, string>;
  clusters: Record<string, number>;
  x: number;
  y: number;
}

export interface Neighbor {
  id: string;
  distance: number;
}

export interface EvolutionSeries {
  cluster: number;
  total: number;
  counts: Record<string, number>;
}

export interface GraphPayload {
  threshold: number | null;
  caution: string;
  nodes: { row: number; id: string; excerpt: string; degree: number }[];
  edges: { source: number; target: number; probability: number }[];
}

/** What the UI is currently showing; version guards stale responses. */
export interface ViewState {
  overlay: string;
  year: number | "all";
  method: string;
  selectedId: string | null;
  neighborK: number;
  version: number;
}
