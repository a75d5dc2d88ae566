"""Information-theoretic clustering validation.

Entropies are in bits.  Homogeneity is 1 - H(C|K)/H(C) and completeness is
1 - H(K|C)/H(K), each defined as 1 when its denominator entropy is zero.
NMI uses arithmetic normalization, I(C;K) / ((H(C)+H(K))/2), which equals
the V-measure (the harmonic mean of homogeneity and completeness).

Partial clusterings carry a NOISE (-1) row label; noise rows are excluded
by default (with the scored fraction reported as coverage) or folded in as
one extra cluster under the "as_cluster" policy.  Rows with MISSING (-1)
truth are always excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NOISE = -1
MISSING = -1

NOISE_POLICIES = ("exclude", "as_cluster")


class NothingToScoreError(ValueError):
    """All rows were excluded by missing truth and/or the noise policy."""


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray  # (|classes|, |clusters|)
    n: int
    coverage: float

    @property
    def class_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def cluster_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


@dataclass(frozen=True)
class ClusterScore:
    nmi: float
    homogeneity: float
    completeness: float
    v_measure: float
    coverage: float


def contingency(truth: np.ndarray, clusters: np.ndarray,
                noise_policy: str = "exclude") -> ContingencyTable:
    """Joint (class, cluster) counts under the chosen noise policy."""
    if noise_policy not in NOISE_POLICIES:
        raise ValueError(f"unknown noise policy {noise_policy!r}")
    truth = np.asarray(truth)
    clusters = np.asarray(clusters)
    if truth.shape != clusters.shape or truth.ndim != 1:
        raise ValueError("truth and cluster labels must be equal-length 1-D")
    total = truth.shape[0]
    labeled = truth != MISSING
    keep = labeled.copy()
    if noise_policy == "exclude":
        keep &= clusters != NOISE
    if not np.any(keep):
        raise NothingToScoreError("no rows left to score")
    # class axis covers every labeled row, so excluded-noise classes keep
    # a (zero-count) row; cluster axis covers only scored rows
    class_values = np.unique(truth[labeled])
    cluster_values = np.unique(clusters[keep])
    class_idx = np.searchsorted(class_values, truth[keep])
    cluster_idx = np.searchsorted(cluster_values, clusters[keep])
    counts = np.zeros((class_values.size, cluster_values.size), dtype=np.int64)
    np.add.at(counts, (class_idx, cluster_idx), 1)
    return ContingencyTable(counts=counts, n=int(keep.sum()),
                            coverage=float(keep.sum()) / total)


def entropy(marginal: np.ndarray) -> float:
    """Shannon entropy in bits of a count vector; 0*log(0) is 0."""
    marginal = np.asarray(marginal, dtype=np.float64)
    if np.any(marginal < 0):
        raise ValueError("negative counts")
    total = marginal.sum()
    if total <= 0:
        raise ValueError("entropy of an empty marginal")
    p = marginal[marginal > 0] / total
    return float(-np.sum(p * np.log2(p)))


def _joint_entropies(table: ContingencyTable) -> tuple[float, float, float]:
    h_class = entropy(table.class_marginals)
    h_cluster = entropy(table.cluster_marginals)
    h_joint = entropy(table.counts.ravel())
    return h_class, h_cluster, h_joint


def mutual_information(table: ContingencyTable) -> float:
    h_class, h_cluster, h_joint = _joint_entropies(table)
    return max(0.0, h_class + h_cluster - h_joint)


def homogeneity_completeness(table: ContingencyTable) -> tuple[float, float]:
    # I(C;K) = H(C) - H(C|K) = H(K) - H(K|C), so both ratios share one
    # mutual-information value and the NMI/V-measure identity is exact.
    h_class, h_cluster, _ = _joint_entropies(table)
    info = mutual_information(table)
    hom = 1.0 if h_class == 0.0 else info / h_class
    com = 1.0 if h_cluster == 0.0 else info / h_cluster
    return min(hom, 1.0), min(com, 1.0)


def v_measure(table: ContingencyTable) -> float:
    hom, com = homogeneity_completeness(table)
    if hom + com == 0.0:
        return 0.0
    return 2.0 * hom * com / (hom + com)


def nmi_arithmetic(table: ContingencyTable) -> float:
    h_class, h_cluster, _ = _joint_entropies(table)
    if h_class == 0.0 and h_cluster == 0.0:
        return 1.0
    if h_class == 0.0 or h_cluster == 0.0:
        return 0.0
    return mutual_information(table) / ((h_class + h_cluster) / 2.0)


def score(truth: np.ndarray, clusters: np.ndarray,
          noise_policy: str = "exclude") -> ClusterScore:
    table = contingency(truth, clusters, noise_policy)
    hom, com = homogeneity_completeness(table)
    return ClusterScore(nmi=nmi_arithmetic(table), homogeneity=hom,
                        completeness=com, v_measure=v_measure(table),
                        coverage=table.coverage)
