"""Clustering of (reduced) embeddings: K-Means, Ward linkage, OPTICS.

All distances are Euclidean.  Assignments use contiguous labels 0..k-1;
density methods may additionally emit NOISE (-1) for unclustered rows.
Every run is single-threaded and seeded, so results are reproducible.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .reduce import pca_fit, pca_transform

NOISE = -1
UNDEFINED = np.inf

DENSITY_METHODS = ("optics", "dbscan")


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    k: int
    method: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = np.asarray(self.labels)
        non_noise = np.unique(labels[labels != NOISE])
        if non_noise.size != self.k or \
                (non_noise.size and not np.array_equal(non_noise, np.arange(self.k))):
            raise ValueError("non-noise labels must form the range 0..k-1")
        if np.any(labels == NOISE) and self.method not in DENSITY_METHODS:
            raise ValueError(f"NOISE labels not allowed for method {self.method!r}")


def _pairwise_sq(X: np.ndarray) -> np.ndarray:
    norms = np.sum(X * X, axis=1)
    d2 = norms[:, None] + norms[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


# ---------------------------------------------------------------------------
# K-Means
# ---------------------------------------------------------------------------


@dataclass
class KmeansResult:
    assignment: ClusterAssignment
    centroids: np.ndarray
    inertia: float
    inertia_trace: list[float]


def _kmeanspp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    d2 = np.sum((X - X[centers[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            for i in range(n):
                if i not in centers:
                    centers.append(i)
                    break
            else:
                centers.append(centers[-1])
        else:
            centers.append(int(rng.choice(n, p=d2 / total)))
        d2 = np.minimum(d2, np.sum((X - X[centers[-1]]) ** 2, axis=1))
    return X[centers].copy()


def kmeans(X: np.ndarray, k: int, seed: int = 0, max_iter: int = 300) -> KmeansResult:
    """Seeded k-means++ initialization plus Lloyd iterations to a fixpoint.

    An emptied cluster is re-seeded at the point farthest from its current
    centroid.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got {k}")
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(X, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    trace: list[float] = []
    for _ in range(max_iter):
        d2 = np.sum((X[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(n), new_labels].sum())
        trace.append(inertia)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = X[labels == j]
            if members.shape[0]:
                centroids[j] = members.mean(axis=0)
            else:
                farthest = int(np.argmax(d2[np.arange(n), labels]))
                centroids[j] = X[farthest]
    d2 = np.sum((X[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    labels, k_eff, centroids = _compact_labels(labels, centroids)
    assignment = ClusterAssignment(labels, k_eff, "kmeans",
                                   {"k": k, "seed": seed, "max_iter": max_iter})
    return KmeansResult(assignment, centroids, inertia, trace)


def _compact_labels(labels: np.ndarray,
                    centroids: np.ndarray) -> tuple[np.ndarray, int, np.ndarray]:
    used = np.unique(labels)
    remap = {int(old): new for new, old in enumerate(used)}
    return (np.array([remap[int(v)] for v in labels], dtype=np.int64),
            used.size, centroids[used])


# ---------------------------------------------------------------------------
# Agglomerative Ward
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dendrogram:
    """Merge list (cluster_a, cluster_b, cost, new_size); new cluster ids
    continue from N upward, as is conventional for linkage matrices."""
    merges: tuple[tuple[int, int, float, int], ...]

    @property
    def costs(self) -> np.ndarray:
        return np.array([m[2] for m in self.merges])


def ward(X: np.ndarray, target_k: int | None = None,
         cost_cutoff: float | None = None) -> tuple[ClusterAssignment, Dendrogram]:
    """Bottom-up Ward clustering via the Lance-Williams update.

    Cuts at target_k clusters, or at the given merge-cost cutoff; ties on
    merge cost break to the smallest (i, j) cluster-id pair.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least 2 rows")
    if (target_k is None) == (cost_cutoff is None):
        raise ValueError("give exactly one of target_k or cost_cutoff")
    if target_k is not None and not 1 <= target_k <= n:
        raise ValueError(f"target_k must be in 1..{n}")

    # squared Ward heights over cluster ids 0..2N-2 (new ids continue from
    # N); for singleton pairs the height is the point distance
    total = 2 * n - 1
    d2 = np.full((total, total), np.inf)
    d2[:n, :n] = _pairwise_sq(X)
    np.fill_diagonal(d2, np.inf)
    active = np.zeros(total, dtype=bool)
    active[:n] = True
    size = np.ones(total)

    merges: list[tuple[int, int, float, int]] = []
    for step in range(n - 1):
        ids = np.where(active)[0]
        sub = d2[np.ix_(ids, ids)]
        # row-major argmin = lexicographically smallest (i, j) among ties
        flat = int(np.argmin(sub))
        i = int(ids[flat // ids.size])
        j = int(ids[flat % ids.size])
        if i > j:
            i, j = j, i
        cost2 = float(d2[i, j])
        merged = n + step
        others = ids[(ids != i) & (ids != j)]
        if others.size:
            ni, nj, nk = size[i], size[j], size[others]
            new = ((ni + nk) * d2[i, others] + (nj + nk) * d2[j, others]
                   - nk * cost2) / (ni + nj + nk)
            d2[merged, others] = new
            d2[others, merged] = new
        active[i] = active[j] = False
        active[merged] = True
        size[merged] = size[i] + size[j]
        merges.append((i, j, math.sqrt(max(cost2, 0.0)), int(size[merged])))

    dendrogram = Dendrogram(tuple(merges))
    if target_k is not None:
        n_merges = n - target_k
    else:
        n_merges = int(np.searchsorted(dendrogram.costs, cost_cutoff, side="right"))
    labels = cut_dendrogram(dendrogram, n, n_merges)
    params = {"target_k": target_k, "cost_cutoff": cost_cutoff}
    assignment = ClusterAssignment(labels, int(labels.max()) + 1, "ward", params)
    return assignment, dendrogram


def cut_dendrogram(dendrogram: Dendrogram, n: int, n_merges: int) -> np.ndarray:
    """Replay the first n_merges merges; labels are contiguous by first row."""
    parent = list(range(n + len(dendrogram.merges)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step in range(n_merges):
        a, b, _, _ = dendrogram.merges[step]
        merged = n + step
        parent[find(a)] = merged
        parent[find(b)] = merged
    labels = np.empty(n, dtype=np.int64)
    remap: dict[int, int] = {}
    for row in range(n):
        root = find(row)
        if root not in remap:
            remap[root] = len(remap)
        labels[row] = remap[root]
    return labels


# ---------------------------------------------------------------------------
# OPTICS
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReachabilityProfile:
    order: np.ndarray          # visit order, a permutation of rows
    reachability: np.ndarray   # aligned with order; UNDEFINED starts a component
    core_distance: np.ndarray  # row-indexed

    def __post_init__(self):
        if sorted(self.order.tolist()) != list(range(self.order.size)):
            raise ValueError("order is not a permutation")


def optics(X: np.ndarray, min_pts: int = 10, eps_cut: float | None = None,
           xi: float | None = None, max_eps: float = np.inf,
           min_cluster_size: int | None = None) -> tuple[ReachabilityProfile, ClusterAssignment]:
    """OPTICS ordering plus cluster extraction.

    Exactly one of eps_cut (DBSCAN-equivalent horizontal cut) or xi
    (steep-area extraction) selects the labeling.  Core distance of a row
    is the distance to its min_pts-th nearest neighbor, the row itself
    included.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if min_pts < 2:
        raise ValueError("min_pts must be >= 2")
    if (eps_cut is None) == (xi is None):
        raise ValueError("give exactly one of eps_cut or xi")

    dist = np.sqrt(_pairwise_sq(X))
    if n >= min_pts:
        core = np.sort(dist, axis=1)[:, min_pts - 1]
    else:
        core = np.full(n, UNDEFINED)

    processed = np.zeros(n, dtype=bool)
    reach = np.full(n, UNDEFINED)
    order: list[int] = []
    order_reach: list[float] = []

    def expand(p: int, heap: list) -> None:
        if core[p] > max_eps:
            return
        for o in range(n):
            if processed[o] or dist[p, o] > max_eps:
                continue
            new_reach = max(core[p], dist[p, o])
            if new_reach < reach[o]:
                reach[o] = new_reach
                heapq.heappush(heap, (new_reach, o))

    for start in range(n):
        if processed[start]:
            continue
        processed[start] = True
        order.append(start)
        order_reach.append(UNDEFINED)
        heap: list = []
        expand(start, heap)
        while heap:
            r, q = heapq.heappop(heap)
            if processed[q] or r > reach[q]:
                continue
            processed[q] = True
            order.append(q)
            order_reach.append(r)
            expand(q, heap)

    profile = ReachabilityProfile(np.array(order), np.array(order_reach), core)
    if eps_cut is not None:
        labels = extract_eps(profile, eps_cut)
        params = {"min_pts": min_pts, "eps_cut": eps_cut}
    else:
        labels = extract_xi(profile, xi, min_pts,
                            min_cluster_size or min_pts)
        params = {"min_pts": min_pts, "xi": xi}
    k = int(labels.max()) + 1 if np.any(labels != NOISE) else 0
    return profile, ClusterAssignment(labels, k, "optics", params)


def extract_eps(profile: ReachabilityProfile, eps: float) -> np.ndarray:
    """Horizontal cut of the reachability profile; equals a DBSCAN labeling."""
    n = profile.order.size
    labels = np.full(n, NOISE, dtype=np.int64)
    cluster = -1
    for pos in range(n):
        row = profile.order[pos]
        if profile.reachability[pos] > eps:
            if profile.core_distance[row] <= eps:
                cluster += 1
                labels[row] = cluster
            # else: noise
        else:
            labels[row] = cluster
    return labels


def _extend_region(steep: np.ndarray, counter: np.ndarray, start: int,
                   max_flat: int) -> int:
    """Maximal steep region from start: ends before more than max_flat
    consecutive non-steep points or any counter-direction point."""
    n = steep.size
    end = start
    flat = 0
    index = start
    while index < n:
        if steep[index]:
            flat = 0
            end = index
        elif not counter[index]:
            flat += 1
            if flat > max_flat:
                break
        else:
            break
        index += 1
    return end


def extract_xi(profile: ReachabilityProfile, xi: float, min_pts: int,
               min_cluster_size: int) -> np.ndarray:
    """Steep-area cluster extraction over the reachability profile."""
    if not 0.0 < xi < 1.0:
        raise ValueError("xi must be in (0, 1)")
    r = np.append(profile.reachability, UNDEFINED)
    n = profile.order.size
    comp = 1.0 - xi
    with np.errstate(invalid="ignore"):
        steep_up = r[:-1] <= r[1:] * comp
        steep_down = r[:-1] * comp >= r[1:]
        upward = r[:-1] < r[1:]
        downward = r[:-1] > r[1:]

    def filter_sdas(sdas: list[dict], mib: float) -> list[dict]:
        if np.isinf(mib):
            return []
        kept = [s for s in sdas if mib <= r[s["start"]] * comp]
        for s in kept:
            s["mib"] = max(s["mib"], mib)
        return kept

    sdas: list[dict] = []
    intervals: list[tuple[int, int]] = []
    index = 0
    mib = 0.0
    while index < n:
        mib = max(mib, r[index])
        if steep_down[index]:
            sdas = filter_sdas(sdas, mib)
            start = index
            end = _extend_region(steep_down, upward, start, min_pts)
            sdas.append({"start": start, "end": end, "mib": 0.0})
            index = end + 1
            mib = r[index]
        elif steep_up[index]:
            sdas = filter_sdas(sdas, mib)
            u_start = index
            u_end = _extend_region(steep_up, downward, u_start, min_pts)
            index = u_end + 1
            mib = r[index]
            found = []
            for area in sdas:
                c_start, c_end = area["start"], u_end
                if r[c_end + 1] * comp < area["mib"]:
                    continue
                d_max = r[area["start"]]
                if d_max * comp >= r[c_end + 1]:
                    while (c_start < area["end"]
                           and r[c_start + 1] > r[c_end + 1]):
                        c_start += 1
                elif r[c_end + 1] * comp >= d_max:
                    while c_end > u_start and r[c_end - 1] > d_max:
                        c_end -= 1
                if c_end - c_start + 1 < min_cluster_size:
                    continue
                if c_start > area["end"] or c_end < u_start:
                    continue
                found.append((c_start, c_end))
            intervals.extend(reversed(found))
        else:
            index += 1

    by_position = np.full(n, NOISE, dtype=np.int64)
    label = 0
    for lo, hi in intervals:
        if np.all(by_position[lo:hi + 1] == NOISE):
            by_position[lo:hi + 1] = label
            label += 1
    labels = np.full(n, NOISE, dtype=np.int64)
    labels[profile.order] = by_position
    return labels


def prereduce_for_density(X: np.ndarray) -> np.ndarray:
    """Halve the column count (ceil) with PCA before density clustering."""
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    if d < 2:
        raise ValueError("need at least 2 columns")
    target = math.ceil(d / 2)
    model = pca_fit(X, target)
    return pca_transform(model, X).matrix


# ---------------------------------------------------------------------------
# CSV exports
# ---------------------------------------------------------------------------


def export_assignment_csv(assignment: ClusterAssignment, row_ids: list[str],
                          path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_id", "cluster"])
        for rid, label in zip(row_ids, assignment.labels):
            writer.writerow([rid, int(label)])


def export_dendrogram_csv(dendrogram: Dendrogram, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cluster_a", "cluster_b", "cost", "new_size"])
        for a, b, cost, size in dendrogram.merges:
            writer.writerow([a, b, f"{cost:.12g}", size])


def export_reachability_csv(profile: ReachabilityProfile, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["position", "row", "reachability", "core_distance"])
        for pos, row in enumerate(profile.order):
            writer.writerow([pos, int(row), f"{profile.reachability[pos]:.12g}",
                             f"{profile.core_distance[row]:.12g}"])
