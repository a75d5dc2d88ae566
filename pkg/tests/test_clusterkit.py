import itertools

import numpy as np
import pytest

from vulnspace import clusterkit as ck
from vulnspace.clusterkit import NOISE

# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def exhaustive_min_inertia(X, k):
    """Global k-means optimum by scanning every assignment of points."""
    n = len(X)
    best = np.inf
    for assignment in itertools.product(range(k), repeat=n):
        used = set(assignment)
        if len(used) < k:
            continue
        inertia = 0.0
        for j in used:
            members = X[np.array(assignment) == j]
            inertia += np.sum((members - members.mean(axis=0)) ** 2)
        best = min(best, inertia)
    return best


def dbscan_oracle(X, eps, min_pts):
    """Canonical DBSCAN: BFS from core points in row order."""
    n = len(X)
    dist = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
    core = (dist <= eps).sum(axis=1) >= min_pts  # self counted
    labels = np.full(n, NOISE, dtype=int)
    cid = 0
    for i in range(n):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cid
        queue = [i]
        while queue:
            p = queue.pop(0)
            if not core[p]:
                continue
            for q in range(n):
                if dist[p, q] <= eps and labels[q] == NOISE:
                    labels[q] = cid
                    queue.append(q)
        cid += 1
    return labels


def has_border_points(X, eps, min_pts):
    """Any non-core point within eps of a core point.

    Border points are where eps-cut extraction and canonical DBSCAN may
    legitimately disagree (the assignment depends on traversal order), so
    exact-equivalence fixtures must not contain any.
    """
    n = len(X)
    dist = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
    core = (dist <= eps).sum(axis=1) >= min_pts
    for p in range(n):
        if not core[p] and np.any(core & (dist[p] <= eps)):
            return True
    return False


def same_partition(a, b):
    """Labelings equal up to cluster renumbering; noise must coincide."""
    a, b = np.asarray(a), np.asarray(b)
    if not np.array_equal(a == NOISE, b == NOISE):
        return False
    fwd, bwd = {}, {}
    for x, y in zip(a, b):
        if x == NOISE:
            continue
        if fwd.setdefault(x, y) != y or bwd.setdefault(y, x) != x:
            return False
    return True


# ---------------------------------------------------------------------------
# K-Means
# ---------------------------------------------------------------------------


def test_kmeans_two_pairs_fixture():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    result = ck.kmeans(X, 2, seed=0)
    labels = result.assignment.labels
    assert labels[0] == labels[1] and labels[2] == labels[3]
    assert labels[0] != labels[2]
    centroids = sorted(result.centroids.tolist())
    assert np.allclose(centroids, [[0.0, 0.5], [10.0, 0.5]])
    assert result.inertia == pytest.approx(exhaustive_min_inertia(X, 2))


def test_kmeans_k_equals_n():
    X = np.arange(10.0).reshape(5, 2)
    result = ck.kmeans(X, 5, seed=1)
    assert result.inertia == pytest.approx(0.0, abs=1e-12)
    assert sorted(result.assignment.labels.tolist()) == list(range(5))


def test_kmeans_k1_centroid_is_mean():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(20, 3))
    result = ck.kmeans(X, 1, seed=0)
    assert np.allclose(result.centroids[0], X.mean(axis=0))


def test_kmeans_matches_exhaustive_on_small_fixtures():
    # best of 25 seeded restarts per fixture; Lloyd alone only guarantees a
    # local optimum
    rng = np.random.default_rng(5)
    for trial in range(12):
        n = int(rng.integers(4, 9))
        k = int(rng.integers(2, 4))
        X = rng.normal(size=(n, 2)) * 2.0
        oracle = exhaustive_min_inertia(X, k)
        best = min(ck.kmeans(X, k, seed=s).inertia for s in range(25))
        assert best == pytest.approx(oracle, rel=1e-9), f"trial {trial}"


def test_kmeans_inertia_trace_non_increasing():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(60, 4))
    result = ck.kmeans(X, 4, seed=3)
    assert np.all(np.diff(result.inertia_trace) <= 1e-9)


def test_kmeans_bad_k():
    with pytest.raises(ValueError):
        ck.kmeans(np.zeros((3, 2)), 4)


def test_kmeans_deterministic():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(40, 3))
    a = ck.kmeans(X, 3, seed=5)
    b = ck.kmeans(X, 3, seed=5)
    assert np.array_equal(a.assignment.labels, b.assignment.labels)


# ---------------------------------------------------------------------------
# Ward
# ---------------------------------------------------------------------------


def test_ward_two_tight_pairs():
    X = np.array([[0.0, 0.0], [0.0, 0.1], [10.0, 0.0], [10.0, 0.1]])
    assignment, _ = ck.ward(X, target_k=2)
    labels = assignment.labels
    assert labels[0] == labels[1] and labels[2] == labels[3]
    assert labels[0] != labels[2]
    # brute force over all 2-partitions by within-cluster sum of squares
    best, best_cost = None, np.inf
    for mask in range(1, 2 ** 4 - 1):
        part = [bool(mask & (1 << i)) for i in range(4)]
        cost = 0.0
        for side in (True, False):
            members = X[np.array(part) == side]
            if len(members):
                cost += np.sum((members - members.mean(axis=0)) ** 2)
        if cost < best_cost:
            best, best_cost = part, cost
    oracle = np.array(best, dtype=int)
    assert same_partition(labels, oracle)


def test_ward_target_k_n_singletons():
    X = np.random.default_rng(0).normal(size=(6, 2))
    assignment, _ = ck.ward(X, target_k=6)
    assert assignment.labels.tolist() == list(range(6))


def test_ward_merge_costs_non_decreasing_random():
    rng = np.random.default_rng(1)
    for _ in range(10):
        X = rng.normal(size=(20, 3))
        _, dendrogram = ck.ward(X, target_k=1)
        assert np.all(np.diff(dendrogram.costs) >= -1e-9)


def test_ward_merge_list_shape():
    X = np.random.default_rng(2).normal(size=(12, 2))
    _, dendrogram = ck.ward(X, target_k=3)
    assert len(dendrogram.merges) == 11
    assert dendrogram.merges[-1][3] == 12


def test_ward_cost_cutoff():
    X = np.array([[0.0, 0.0], [0.0, 0.1], [10.0, 0.0], [10.0, 0.1]])
    assignment, dendrogram = ck.ward(X, cost_cutoff=1.0)
    assert assignment.k == 2
    assert same_partition(assignment.labels, [0, 0, 1, 1])


def test_ward_requires_exactly_one_cut():
    X = np.zeros((4, 2))
    with pytest.raises(ValueError):
        ck.ward(X)
    with pytest.raises(ValueError):
        ck.ward(X, target_k=2, cost_cutoff=1.0)


def test_ward_singleton_heights_are_distances():
    X = np.array([[0.0], [3.0], [10.0]])
    _, dendrogram = ck.ward(X, target_k=1)
    assert dendrogram.merges[0][2] == pytest.approx(3.0)


# ---------------------------------------------------------------------------
# OPTICS
# ---------------------------------------------------------------------------


def test_optics_line_fixture():
    X = np.array([[0.0], [0.1], [0.2], [10.0]])
    profile, assignment = ck.optics(X, min_pts=2, eps_cut=1.0)
    labels = assignment.labels
    assert labels[0] == labels[1] == labels[2] != NOISE
    assert labels[3] == NOISE
    assert profile.reachability[0] == np.inf


def test_optics_core_distance_definition():
    X = np.array([[0.0], [0.7], [5.0]])
    profile, _ = ck.optics(X, min_pts=2, eps_cut=1.0)
    assert profile.core_distance[0] == pytest.approx(0.7)
    assert profile.core_distance[1] == pytest.approx(0.7)
    assert profile.core_distance[2] == pytest.approx(4.3)


def test_optics_order_is_permutation():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 2))
    profile, _ = ck.optics(X, min_pts=3, eps_cut=0.8)
    assert sorted(profile.order.tolist()) == list(range(30))


def test_optics_reachability_lower_bounded_by_core_of_predecessor():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(25, 2))
    profile, _ = ck.optics(X, min_pts=3, eps_cut=1.0)
    finite = np.isfinite(profile.reachability)
    assert np.all(profile.reachability[finite] >= 0)


def border_free_set(seed, eps=0.9, min_pts=4):
    """Random blob+noise points where every point is eps-core or true noise."""
    for attempt in range(100):
        rng = np.random.default_rng(seed * 1000 + attempt)
        centers = rng.uniform(-6, 6, size=(3, 2))
        X = np.vstack([c + rng.normal(scale=0.28, size=(14, 2)) for c in centers]
                      + [rng.uniform(-8, 8, size=(8, 2))])
        if not has_border_points(X, eps, min_pts):
            return X, dbscan_oracle(X, eps, min_pts)
    raise AssertionError("could not build a border-free fixture")


@pytest.mark.parametrize("seed", range(5))
def test_optics_eps_cut_matches_dbscan_oracle(seed):
    X, oracle = border_free_set(seed)
    _, assignment = ck.optics(X, min_pts=4, eps_cut=0.9)
    assert same_partition(assignment.labels, oracle)


def test_optics_xi_extraction_on_blobs():
    rng = np.random.default_rng(9)
    a = rng.normal(loc=0.0, scale=0.3, size=(40, 2))
    b = rng.normal(loc=8.0, scale=0.3, size=(40, 2))
    X = np.vstack([a, b])
    _, assignment = ck.optics(X, min_pts=5, xi=0.05)
    labels = assignment.labels
    assert assignment.k >= 2
    # the two blobs land in different clusters
    la = np.bincount(labels[:40][labels[:40] != NOISE]).argmax()
    lb = np.bincount(labels[40:][labels[40:] != NOISE]).argmax()
    assert la != lb


def test_optics_min_pts_validation():
    with pytest.raises(ValueError):
        ck.optics(np.zeros((5, 2)), min_pts=1, eps_cut=1.0)
    with pytest.raises(ValueError):
        ck.optics(np.zeros((5, 2)), min_pts=2)


def test_prereduce_halves_columns():
    rng = np.random.default_rng(10)
    assert ck.prereduce_for_density(rng.normal(size=(50, 20))).shape[1] == 10
    assert ck.prereduce_for_density(rng.normal(size=(50, 2))).shape[1] == 1
    assert ck.prereduce_for_density(rng.normal(size=(50, 7))).shape[1] == 4


def test_prereduce_feeds_optics():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(40, 6))
    reduced = ck.prereduce_for_density(X)
    _, assignment = ck.optics(reduced, min_pts=4, eps_cut=1.0)
    assert assignment.labels.shape == (40,)


def test_assignment_validation():
    with pytest.raises(ValueError, match="0..k-1"):
        ck.ClusterAssignment(np.array([0, 2]), 2, "kmeans")
    with pytest.raises(ValueError, match="NOISE"):
        ck.ClusterAssignment(np.array([0, NOISE]), 1, "kmeans")
    ck.ClusterAssignment(np.array([0, NOISE]), 1, "optics")  # fine


def test_exports_roundtrip(tmp_path):
    rng = np.random.default_rng(12)
    X = rng.normal(size=(15, 2))
    result = ck.kmeans(X, 3, seed=0)
    ck.export_assignment_csv(result.assignment,
                             [f"CVE-2020-{i:04d}" for i in range(15)],
                             tmp_path / "assign.csv")
    lines = (tmp_path / "assign.csv").read_text().strip().splitlines()
    assert len(lines) == 16

    _, dendrogram = ck.ward(X, target_k=2)
    ck.export_dendrogram_csv(dendrogram, tmp_path / "dendro.csv")
    assert len((tmp_path / "dendro.csv").read_text().strip().splitlines()) == 15

    profile, _ = ck.optics(X, min_pts=3, eps_cut=1.0)
    ck.export_reachability_csv(profile, tmp_path / "reach.csv")
    assert len((tmp_path / "reach.csv").read_text().strip().splitlines()) == 16
