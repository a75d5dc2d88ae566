"""Cluster-evolution analytics: per-cluster annual counts and top-n trends."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clusterkit import NOISE, ClusterAssignment
from .corpus import Snapshot


@dataclass(frozen=True)
class EvolutionSeries:
    cluster_id: int
    counts: dict[int, int]  # year -> count, zero-filled inside the range
    total: int


def evolution(assignment: ClusterAssignment, snapshot: Snapshot) -> list[EvolutionSeries]:
    """One zero-filled annual series per non-noise cluster."""
    labels = np.asarray(assignment.labels)
    if labels.shape[0] != len(snapshot):
        raise ValueError(f"assignment has {labels.shape[0]} rows, "
                         f"snapshot has {len(snapshot)}")
    if not np.any(labels != NOISE):
        return []
    lo, hi = snapshot.year_range()
    years = list(range(lo, hi + 1))
    series = []
    for cluster_id in range(assignment.k):
        counts = {year: 0 for year in years}
        for row in np.where(labels == cluster_id)[0]:
            counts[snapshot.records[row].year] += 1
        series.append(EvolutionSeries(cluster_id=cluster_id, counts=counts,
                                      total=int(sum(counts.values()))))
    return series


def top_n(series: list[EvolutionSeries], n: int) -> list[EvolutionSeries]:
    """The n largest series by total; ties go to the lower cluster id."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ranked = sorted(series, key=lambda s: (-s.total, s.cluster_id))
    return ranked[:n]


def export_evolution_csv(series: list[EvolutionSeries], path: str | Path) -> None:
    """cluster x year count matrix."""
    years = sorted({year for s in series for year in s.counts})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cluster"] + [str(y) for y in years])
        for s in series:
            writer.writerow([s.cluster_id] + [s.counts.get(y, 0) for y in years])
