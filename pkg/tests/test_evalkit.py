import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vulnspace import evalkit
from vulnspace.evalkit import (MISSING, NOISE, ClusterScore, ContingencyTable,
                               NothingToScoreError, contingency, entropy,
                               homogeneity_completeness, mutual_information,
                               nmi_arithmetic, score, v_measure)

# ---------------------------------------------------------------------------
# Independent brute-force oracle: direct probability sums over the raw
# label pairs, no shared code with the module under test.
# ---------------------------------------------------------------------------


def oracle_scores(truth, clusters):
    pairs = list(zip(truth, clusters))
    n = len(pairs)
    joint = {}
    for pair in pairs:
        joint[pair] = joint.get(pair, 0) + 1
    p_joint = {k: v / n for k, v in joint.items()}
    p_class = {}
    p_cluster = {}
    for (c, k), p in p_joint.items():
        p_class[c] = p_class.get(c, 0.0) + p
        p_cluster[k] = p_cluster.get(k, 0.0) + p

    def h(ps):
        return -sum(p * math.log2(p) for p in ps if p > 0)

    hc = h(p_class.values())
    hk = h(p_cluster.values())
    info = 0.0
    for (c, k), p in p_joint.items():
        info += p * math.log2(p / (p_class[c] * p_cluster[k]))
    info = max(0.0, info)
    hom = 1.0 if hc == 0 else info / hc
    com = 1.0 if hk == 0 else info / hk
    if hc == 0 and hk == 0:
        nmi = 1.0
    elif hc == 0 or hk == 0:
        nmi = 0.0
    else:
        nmi = info / ((hc + hk) / 2)
    v = 0.0 if hom + com == 0 else 2 * hom * com / (hom + com)
    return {"h_class": hc, "h_cluster": hk, "info": info,
            "hom": hom, "com": com, "nmi": nmi, "v": v}


def test_contingency_exclude_noise():
    table = contingency(np.array([0, 0, 1]), np.array([0, 0, NOISE]))
    assert table.counts.shape == (2, 1)
    assert table.n == 2
    assert table.coverage == pytest.approx(2 / 3)


def test_contingency_noise_as_cluster():
    table = contingency(np.array([0, 0, 1]), np.array([0, 0, NOISE]),
                        noise_policy="as_cluster")
    assert table.counts.shape == (2, 2)
    assert table.coverage == 1.0
    assert table.n == 3


def test_contingency_missing_truth_always_excluded():
    table = contingency(np.array([0, MISSING, 1]), np.array([0, 1, 1]),
                        noise_policy="as_cluster")
    assert table.n == 2


def test_contingency_permutation_same_marginals():
    truth = np.array([0, 1, 1, 2, 0])
    clusters = np.array([1, 0, 0, 2, 1])
    perm = np.array([4, 2, 0, 3, 1])
    a = contingency(truth, clusters)
    b = contingency(truth[perm], clusters[perm])
    assert np.array_equal(sorted(a.class_marginals), sorted(b.class_marginals))
    assert np.array_equal(a.counts, b.counts)


def test_contingency_nothing_to_score():
    with pytest.raises(NothingToScoreError):
        contingency(np.array([MISSING, 0]), np.array([0, NOISE]))


@pytest.mark.parametrize("counts,expected", [
    ([1, 1], 1.0),
    ([4, 0], 0.0),
    ([1, 1, 1, 1], 2.0),
])
def test_entropy_known_values(counts, expected):
    assert entropy(np.array(counts)) == pytest.approx(expected, abs=1e-12)


def test_entropy_empty_errors():
    with pytest.raises(ValueError):
        entropy(np.array([0, 0]))


def test_identical_partitions_perfect():
    truth = np.array([0, 0, 1, 1, 2])
    table = contingency(truth, truth)
    assert homogeneity_completeness(table) == (1.0, 1.0)
    assert nmi_arithmetic(table) == 1.0
    assert v_measure(table) == 1.0


def test_singleton_clusters_hand_values():
    # truth [0,0,1,1] vs clusters [0,1,2,3]: H(C|K)=0 -> hom 1;
    # H(K|C)=1 bit, H(K)=2 bits -> com 0.5; V = 2/3
    table = contingency(np.array([0, 0, 1, 1]), np.array([0, 1, 2, 3]))
    hom, com = homogeneity_completeness(table)
    assert hom == pytest.approx(1.0, abs=1e-12)
    assert com == pytest.approx(0.5, abs=1e-12)
    assert v_measure(table) == pytest.approx(2 / 3, abs=1e-12)
    assert nmi_arithmetic(table) == pytest.approx(2 / 3, abs=1e-12)


def test_single_cluster_hand_values():
    table = contingency(np.array([0, 0, 1, 1]), np.array([0, 0, 0, 0]))
    hom, com = homogeneity_completeness(table)
    assert hom == pytest.approx(0.0, abs=1e-12)
    assert com == pytest.approx(1.0, abs=1e-12)


def test_independent_labels_near_zero_nmi():
    rng = np.random.default_rng(42)
    truth = rng.integers(0, 2, size=10_000)
    clusters = rng.integers(0, 2, size=10_000)
    assert nmi_arithmetic(contingency(truth, clusters)) < 0.02


def _random_case(rng, n_max=60, missing=False, noise=False):
    n = int(rng.integers(2, n_max))
    truth = rng.integers(0, int(rng.integers(1, 6)) + 1, size=n)
    clusters = rng.integers(0, int(rng.integers(1, 6)) + 1, size=n)
    if missing:
        truth[rng.random(n) < 0.1] = MISSING
    if noise:
        clusters[rng.random(n) < 0.1] = NOISE
    return truth, clusters


def test_matches_oracle_on_100_random_tables():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 100:
        truth, clusters = _random_case(rng)
        table = contingency(truth, clusters)
        got = score(truth, clusters)
        want = oracle_scores(truth.tolist(), clusters.tolist())
        assert entropy(table.class_marginals) == pytest.approx(want["h_class"], abs=1e-10)
        assert entropy(table.cluster_marginals) == pytest.approx(want["h_cluster"], abs=1e-10)
        assert mutual_information(table) == pytest.approx(want["info"], abs=1e-10)
        assert got.homogeneity == pytest.approx(want["hom"], abs=1e-10)
        assert got.completeness == pytest.approx(want["com"], abs=1e-10)
        assert got.nmi == pytest.approx(want["nmi"], abs=1e-10)
        assert got.v_measure == pytest.approx(want["v"], abs=1e-10)
        checked += 1


def test_nmi_equals_v_measure_identity():
    rng = np.random.default_rng(19)
    for _ in range(200):
        truth, clusters = _random_case(rng, missing=True, noise=True)
        try:
            table = contingency(truth, clusters)
        except NothingToScoreError:
            continue
        assert abs(nmi_arithmetic(table) - v_measure(table)) < 1e-12


@settings(max_examples=150)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)),
                min_size=1, max_size=40))
def test_scores_invariant_under_label_permutation(pairs):
    truth = np.array([t for t, _ in pairs])
    clusters = np.array([c for _, c in pairs])
    base = score(truth, clusters)
    class_perm = np.array([3, 1, 4, 0, 2])
    cluster_perm = np.array([2, 0, 3, 4, 1])
    permuted = score(class_perm[truth], cluster_perm[clusters])
    assert base.nmi == pytest.approx(permuted.nmi, abs=1e-12)
    assert base.homogeneity == pytest.approx(permuted.homogeneity, abs=1e-12)
    assert base.completeness == pytest.approx(permuted.completeness, abs=1e-12)


def test_refinement_never_decreases_homogeneity():
    rng = np.random.default_rng(23)
    for _ in range(30):
        n = 40
        truth = rng.integers(0, 4, size=n)
        clusters = rng.integers(0, 3, size=n)
        # split one random cluster into two
        refined = clusters.copy()
        target = int(rng.integers(0, 3))
        members = np.where(refined == target)[0]
        if members.size < 2:
            continue
        half = rng.choice(members, size=members.size // 2, replace=False)
        refined[half] = refined.max() + 1
        before, _ = homogeneity_completeness(contingency(truth, clusters))
        after, _ = homogeneity_completeness(contingency(truth, refined))
        assert after >= before - 1e-12


def test_mutual_information_bounds():
    rng = np.random.default_rng(29)
    for _ in range(50):
        truth, clusters = _random_case(rng)
        table = contingency(truth, clusters)
        info = mutual_information(table)
        assert -1e-12 <= info
        assert info <= min(entropy(table.class_marginals),
                           entropy(table.cluster_marginals)) + 1e-12


def test_score_composition_invariants():
    truth = np.array([0, 0, 1, 1, 2, MISSING])
    clusters = np.array([0, 0, 1, NOISE, 2, 1])
    got = score(truth, clusters)
    assert isinstance(got, ClusterScore)
    assert 0.0 <= got.nmi <= 1.0
    assert got.v_measure == pytest.approx(
        2 * got.homogeneity * got.completeness /
        (got.homogeneity + got.completeness), abs=1e-12)
    assert got.coverage == pytest.approx(4 / 6)
