"""Immutable analysis bundle and the read-only HTTP service over it.

A bundle collects everything the explorer needs: the snapshot, a 2-D
projection, cluster assignments per method, per-row label overlays,
representation matrices for neighbor queries, evolution series, and an
optional composability graph.  All row-indexed artifacts share the
snapshot's canonical row order.

Request handling is a pure function from (bundle, path, query) to a JSON
payload; the HTTP layer is a thin stdlib wrapper.  Responses are
serialized with sorted keys and fixed separators, so identical requests
return byte-identical bodies.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import binio
from . import classify
from . import temporal
from .clusterkit import NOISE, ClusterAssignment
from .corpus import Snapshot, read_snapshot_from, write_snapshot_to
from .temporal import EvolutionSeries
from .theorykit import CompositionGraph, GraphNode

NONE_VALUE = "none"  # overlay value for missing labels (rendered white)

DEFAULT_NEIGHBOR_K = 10


class BundleError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisBundle:
    snapshot: Snapshot
    coords: np.ndarray                       # N x 2 projection
    assignments: dict[str, ClusterAssignment]
    overlays: dict[str, list[str]]           # label overlays, "none" for missing
    spaces: dict[str, np.ndarray]            # representation name -> N x d
    evolution: dict[str, list[EvolutionSeries]]
    graph: CompositionGraph | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def row_ids(self) -> list[str]:
        return [r.id for r in self.snapshot.records]


def build_overlays(snapshot: Snapshot) -> dict[str, list[str]]:
    """String overlay per label task; missing labels become "none"."""
    overlays = {}
    for name, task in classify.tasks_from_snapshot(snapshot).items():
        overlays[name] = [NONE_VALUE if y == classify.MISSING
                          else task.classes[y] for y in task.y]
    return overlays


def bundle(snapshot: Snapshot, coords: np.ndarray,
           assignments: dict[str, ClusterAssignment],
           spaces: dict[str, np.ndarray],
           graph: CompositionGraph | None = None,
           overlays: dict[str, list[str]] | None = None,
           metadata: dict | None = None) -> AnalysisBundle:
    """Validate row alignment and assemble the immutable bundle."""
    n = len(snapshot)
    coords = np.asarray(coords, dtype=np.float64)
    if coords.shape != (n, 2):
        raise BundleError(f"projection has {coords.shape[0]} rows, expected {n}")
    overlays = overlays if overlays is not None else build_overlays(snapshot)
    for name, values in overlays.items():
        if len(values) != n:
            raise BundleError(f"overlay {name!r} has {len(values)} rows, expected {n}")
    for method, assignment in assignments.items():
        if assignment.labels.shape[0] != n:
            raise BundleError(f"assignment {method!r} has "
                              f"{assignment.labels.shape[0]} rows, expected {n}")
    for name, matrix in spaces.items():
        if matrix.shape[0] != n:
            raise BundleError(f"space {name!r} has {matrix.shape[0]} rows, expected {n}")
    evolution = {method: temporal.evolution(assignment, snapshot)
                 for method, assignment in sorted(assignments.items())}
    return AnalysisBundle(snapshot=snapshot, coords=coords,
                          assignments=dict(sorted(assignments.items())),
                          overlays=dict(sorted(overlays.items())),
                          spaces=dict(sorted(spaces.items())),
                          evolution=evolution, graph=graph,
                          metadata=metadata or {})


# ---------------------------------------------------------------------------
# Pure request handling
# ---------------------------------------------------------------------------


def _error(status: int, code: str, **extra) -> tuple[int, dict]:
    return status, {"error": {"code": code, **extra}}


def _cluster_overlay(bundle: AnalysisBundle, method: str) -> list[str]:
    labels = bundle.assignments[method].labels
    return [NONE_VALUE if v == NOISE else str(int(v)) for v in labels]


def _overlay_values(bundle: AnalysisBundle, overlay: str,
                    method: str) -> list[str] | None:
    if overlay == "cluster":
        if method not in bundle.assignments:
            return None
        return _cluster_overlay(bundle, method)
    return bundle.overlays.get(overlay)


def _meta(bundle: AnalysisBundle) -> dict:
    by_year = {}
    for record in bundle.snapshot.records:
        by_year[str(record.year)] = by_year.get(str(record.year), 0) + 1
    return {
        "rows": len(bundle.snapshot),
        "years": bundle.snapshot.years,
        "overlays": sorted(bundle.overlays) + ["cluster"],
        "methods": sorted(bundle.assignments),
        "spaces": sorted(bundle.spaces),
        "counts": {"by_year": by_year},
        "has_graph": bundle.graph is not None,
        "metadata": bundle.metadata,
    }


def _points(bundle: AnalysisBundle, query: dict) -> tuple[int, dict]:
    overlay = query.get("overlay", "cluster")
    method = query.get("method", next(iter(bundle.assignments), ""))
    values = _overlay_values(bundle, overlay, method)
    if values is None:
        field_name = "method" if overlay == "cluster" else "overlay"
        return _error(400, "bad_param", field=field_name)
    year_filter = query.get("year", "all")
    if year_filter != "all":
        try:
            year_value = int(year_filter)
        except ValueError:
            return _error(400, "bad_param", field="year")
    points = []
    for row, record in enumerate(bundle.snapshot.records):
        if year_filter != "all" and record.year != year_value:
            continue
        points.append({"id": record.id,
                       "x": float(bundle.coords[row, 0]),
                       "y": float(bundle.coords[row, 1]),
                       "value": values[row]})
    return 200, {"points": points, "overlay": overlay}


def _row_index(bundle: AnalysisBundle, cve_id: str) -> int | None:
    for row, record in enumerate(bundle.snapshot.records):
        if record.id == cve_id:
            return row
    return None


def _cve_payload(bundle: AnalysisBundle, row: int) -> dict:
    record = bundle.snapshot.records[row]
    labels = {name: values[row] for name, values in bundle.overlays.items()}
    clusters = {method: int(a.labels[row]) for method, a in bundle.assignments.items()}
    return {
        "id": record.id,
        "published": record.published.isoformat(),
        "year": record.year,
        "day_of_year": record.day_of_year,
        "description": record.description,
        "cwes": list(record.cwes),
        "cpes": [list(pair) for pair in record.cpes],
        "labels": labels,
        "clusters": clusters,
        "x": float(bundle.coords[row, 0]),
        "y": float(bundle.coords[row, 1]),
    }


def _neighbors(bundle: AnalysisBundle, cve_id: str, query: dict) -> tuple[int, dict]:
    row = _row_index(bundle, cve_id)
    if row is None:
        return _error(404, "unknown_id", id=cve_id)
    space = query.get("space", sorted(bundle.spaces)[0] if bundle.spaces else "")
    if space not in bundle.spaces:
        return _error(400, "bad_param", field="space")
    try:
        k = int(query.get("k", str(DEFAULT_NEIGHBOR_K)))
    except ValueError:
        return _error(400, "bad_param", field="k")
    n = len(bundle.snapshot)
    if not 1 <= k <= n - 1:
        return _error(400, "bad_param", field="k")
    matrix = bundle.spaces[space]
    dist = np.sqrt(((matrix - matrix[row]) ** 2).sum(axis=1))
    dist[row] = np.inf  # the row itself is not its own neighbor
    nearest = np.argsort(dist, kind="stable")[:k]
    neighbors = [{"id": bundle.snapshot.records[int(i)].id,
                  "distance": float(dist[int(i)])} for i in nearest]
    return 200, {"id": cve_id, "space": space, "k": k, "neighbors": neighbors}


def _evolution(bundle: AnalysisBundle, query: dict) -> tuple[int, dict]:
    method = query.get("method", next(iter(bundle.assignments), ""))
    if method not in bundle.evolution:
        return _error(400, "bad_param", field="method")
    series = bundle.evolution[method]
    top = query.get("top")
    if top is not None:
        try:
            top_int = int(top)
            if top_int < 1:
                raise ValueError
        except ValueError:
            return _error(400, "bad_param", field="top")
        series = temporal.top_n(series, top_int)
    payload = [{"cluster": s.cluster_id, "total": s.total,
                "counts": {str(y): c for y, c in sorted(s.counts.items())}}
               for s in series]
    return 200, {"method": method, "series": payload}


def _graph(bundle: AnalysisBundle, query: dict) -> tuple[int, dict]:
    if bundle.graph is None:
        return _error(404, "no_graph")
    threshold = bundle.graph.threshold
    if "threshold" in query:
        try:
            threshold = float(query["threshold"])
        except ValueError:
            return _error(400, "bad_param", field="threshold")
        if not 0.0 < threshold < 1.0:
            return _error(400, "bad_param", field="threshold")
    edges = [e for e in bundle.graph.edges if e[2] >= threshold]
    degree: dict[int, int] = {node.row: 0 for node in bundle.graph.nodes}
    for i, j, _ in edges:
        degree[i] += 1
        degree[j] += 1
    nodes = [{"row": n.row, "id": n.cve_id, "excerpt": n.excerpt,
              "degree": degree[n.row]} for n in bundle.graph.nodes]
    return 200, {
        "threshold": threshold,
        "caution": bundle.graph.caution,
        "nodes": nodes,
        "edges": [{"source": i, "target": j, "probability": p}
                  for i, j, p in edges],
    }


def handle_request(bundle: AnalysisBundle, path: str,
                   query: dict[str, str]) -> tuple[int, dict]:
    """Route one GET request; returns (status, JSON-serializable payload)."""
    if path == "/api/meta":
        return 200, _meta(bundle)
    if path == "/api/points":
        return _points(bundle, query)
    if path.startswith("/api/cve/"):
        cve_id = path[len("/api/cve/"):]
        row = _row_index(bundle, cve_id)
        if row is None:
            return _error(404, "unknown_id", id=cve_id)
        return 200, _cve_payload(bundle, row)
    if path.startswith("/api/neighbors/"):
        return _neighbors(bundle, path[len("/api/neighbors/"):], query)
    if path == "/api/evolution":
        return _evolution(bundle, query)
    if path == "/api/graph":
        return _graph(bundle, query)
    return _error(404, "unknown_endpoint", path=path)


def render_body(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


# ---------------------------------------------------------------------------
# HTTP wrapper
# ---------------------------------------------------------------------------


class _Handler(BaseHTTPRequestHandler):
    bundle: AnalysisBundle | None = None

    def do_GET(self):  # noqa: N802 (stdlib naming)
        parsed = urlparse(self.path)
        query = {key: values[0] for key, values in parse_qs(parsed.query).items()}
        status, payload = handle_request(self.bundle, parsed.path, query)
        body = render_body(payload)
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):  # quiet test runs
        pass


def serve(bundle: AnalysisBundle, host: str = "127.0.0.1",
          port: int = 8765) -> ThreadingHTTPServer:
    """Start the read-only service; caller owns shutdown()."""
    handler = type("BundleHandler", (_Handler,), {"bundle": bundle})
    server = ThreadingHTTPServer((host, port), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server


# ---------------------------------------------------------------------------
# VBND persistence
# ---------------------------------------------------------------------------

BUNDLE_MAGIC = "VBND"
BUNDLE_VERSION = 1


def save_bundle(bundle: AnalysisBundle, path: str | Path) -> None:
    with open(path, "wb") as fh:
        binio.write_magic(fh, BUNDLE_MAGIC, BUNDLE_VERSION)
        write_snapshot_to(fh, bundle.snapshot)
        binio.write_f32_matrix(fh, bundle.coords)
        binio.write_u32(fh, len(bundle.assignments))
        for method, assignment in bundle.assignments.items():
            binio.write_str(fh, method)
            binio.write_u32(fh, assignment.k)
            binio.write_str(fh, assignment.method)
            binio.write_str(fh, json.dumps(assignment.params, sort_keys=True))
            binio.write_i32_array(fh, assignment.labels)
        binio.write_u32(fh, len(bundle.overlays))
        for name, values in bundle.overlays.items():
            binio.write_str(fh, name)
            binio.write_str_list(fh, values)
        binio.write_u32(fh, len(bundle.spaces))
        for name, matrix in bundle.spaces.items():
            binio.write_str(fh, name)
            binio.write_f32_matrix(fh, matrix)
        if bundle.graph is None:
            binio.write_u32(fh, 0)
        else:
            binio.write_u32(fh, 1)
            graph = bundle.graph
            binio.write_f64(fh, graph.threshold)
            binio.write_str(fh, graph.caution)
            binio.write_str(fh, graph.advisory or "")
            binio.write_u32(fh, len(graph.nodes))
            for node in graph.nodes:
                binio.write_u32(fh, node.row)
                binio.write_str(fh, node.cve_id)
                binio.write_str(fh, node.excerpt)
                binio.write_u32(fh, node.degree)
            binio.write_u32(fh, len(graph.edges))
            for i, j, probability in graph.edges:
                binio.write_u32(fh, i)
                binio.write_u32(fh, j)
                binio.write_f64(fh, probability)
        binio.write_str(fh, json.dumps(bundle.metadata, sort_keys=True))


def load_bundle(path: str | Path) -> AnalysisBundle:
    with open(path, "rb") as fh:
        binio.read_magic(fh, BUNDLE_MAGIC, BUNDLE_VERSION)
        snapshot = read_snapshot_from(fh)
        coords = binio.read_f32_matrix(fh).astype(np.float64)
        assignments = {}
        for _ in range(binio.read_u32(fh)):
            method_key = binio.read_str(fh)
            k = binio.read_u32(fh)
            method = binio.read_str(fh)
            params = json.loads(binio.read_str(fh))
            labels = binio.read_i32_array(fh).astype(np.int64)
            assignments[method_key] = ClusterAssignment(labels, k, method, params)
        overlays = {}
        for _ in range(binio.read_u32(fh)):
            name = binio.read_str(fh)
            overlays[name] = binio.read_str_list(fh)
        spaces = {}
        for _ in range(binio.read_u32(fh)):
            name = binio.read_str(fh)
            spaces[name] = binio.read_f32_matrix(fh).astype(np.float64)
        graph = None
        if binio.read_u32(fh):
            threshold = binio.read_f64(fh)
            caution = binio.read_str(fh)
            advisory = binio.read_str(fh) or None
            nodes = tuple(GraphNode(row=binio.read_u32(fh),
                                    cve_id=binio.read_str(fh),
                                    excerpt=binio.read_str(fh),
                                    degree=binio.read_u32(fh))
                          for _ in range(binio.read_u32(fh)))
            edges = tuple((binio.read_u32(fh), binio.read_u32(fh),
                           binio.read_f64(fh))
                          for _ in range(binio.read_u32(fh)))
            graph = CompositionGraph(nodes, edges, threshold,
                                     advisory=advisory, caution=caution)
        metadata = json.loads(binio.read_str(fh))
    evolution = {method: temporal.evolution(assignment, snapshot)
                 for method, assignment in assignments.items()}
    return AnalysisBundle(snapshot=snapshot, coords=coords,
                          assignments=assignments, overlays=overlays,
                          spaces=spaces, evolution=evolution, graph=graph,
                          metadata=metadata)


# ---------------------------------------------------------------------------
# Static export (offline explorer mode)
# ---------------------------------------------------------------------------

STATIC_FILES = ("meta.json", "points.json", "cve.json", "neighbors.json",
                "evolution.json", "graph.json")


def export_static(bundle: AnalysisBundle, directory: str | Path) -> list[Path]:
    """One JSON file per endpoint; byte-identical across repeat exports."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    points = []
    for row, record in enumerate(bundle.snapshot.records):
        points.append({
            "id": record.id,
            "x": float(bundle.coords[row, 0]),
            "y": float(bundle.coords[row, 1]),
            "year": record.year,
            "day_of_year": record.day_of_year,
            "overlays": {name: values[row]
                         for name, values in bundle.overlays.items()},
            "clusters": {method: (NONE_VALUE if a.labels[row] == NOISE
                                  else str(int(a.labels[row])))
                         for method, a in bundle.assignments.items()},
        })
    cves = {record.id: _cve_payload(bundle, row)
            for row, record in enumerate(bundle.snapshot.records)}
    neighbor_k = min(DEFAULT_NEIGHBOR_K, len(bundle.snapshot) - 1)
    neighbors = {}
    for space in bundle.spaces:
        per_id = {}
        for record in bundle.snapshot.records:
            _, payload = _neighbors(bundle, record.id,
                                    {"space": space, "k": str(neighbor_k)})
            per_id[record.id] = payload["neighbors"]
        neighbors[space] = per_id
    evolution = {}
    for method in bundle.evolution:
        _, payload = _evolution(bundle, {"method": method})
        evolution[method] = payload["series"]
    if bundle.graph is not None:
        _, graph_payload = _graph(bundle, {})
    else:
        graph_payload = {"nodes": [], "edges": [], "threshold": None,
                         "caution": ""}

    contents = {
        "meta.json": _meta(bundle),
        "points.json": {"points": points},
        "cve.json": cves,
        "neighbors.json": {"k": neighbor_k, "spaces": neighbors},
        "evolution.json": evolution,
        "graph.json": graph_payload,
    }
    written = []
    for name in STATIC_FILES:
        target = directory / name
        target.write_bytes(render_body(contents[name]))
        written.append(target)
    return written
