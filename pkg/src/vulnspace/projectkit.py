"""Exact 2-D t-SNE projection for visualization snapshots.

Pairwise affinities use per-row Gaussian kernels calibrated by binary
search so each row's conditional distribution has entropy log2(perplexity).
The embedding minimizes KL(P || Q) against Student-t similarities by
seeded gradient descent with momentum and early exaggeration.  Everything
is exact O(N^2); scale is managed by sampling rows first, not by
approximating the objective.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TsneParams:
    perplexity: float = 30.0
    iterations: int = 1000
    seed: int = 0
    learning_rate: float = 200.0
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    trace_every: int = 50


@dataclass(frozen=True)
class Projection:
    coords: np.ndarray
    params: TsneParams
    kl_trace: tuple[tuple[int, float], ...]  # (iteration, kl)

    def __post_init__(self):
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("projection coordinates must be finite")
        if any(kl < 0 for _, kl in self.kl_trace):
            raise ValueError("KL divergence cannot be negative")


def _pairwise_sq(X: np.ndarray) -> np.ndarray:
    norms = np.sum(X * X, axis=1)
    d2 = norms[:, None] + norms[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def perplexity_calibrate(sq_distances: np.ndarray, self_index: int,
                         perplexity: float, tol: float = 1e-5,
                         max_steps: int = 64) -> np.ndarray:
    """Conditional probabilities p_{j|i} for one row.

    Binary search on the Gaussian precision until the distribution's
    entropy is log2(perplexity) within tol; warns and returns the best
    effort after max_steps bisections.
    """
    d2 = np.asarray(sq_distances, dtype=np.float64).copy()
    n = d2.shape[0]
    if not 0 < perplexity < n - 1:
        raise ValueError(f"perplexity must be in (0, {n - 1})")
    d2[self_index] = np.inf
    finite = np.isfinite(d2)
    shift = d2[finite].min()
    target = np.log2(perplexity)
    beta, beta_lo, beta_hi = 1.0, 0.0, np.inf
    p = np.zeros(n)
    for _ in range(max_steps):
        w = np.exp(-beta * (d2 - shift))
        w[self_index] = 0.0
        total = w.sum()
        p = w / total
        nz = p > 0
        entropy = float(-np.sum(p[nz] * np.log2(p[nz])))
        if abs(entropy - target) < tol:
            return p
        if entropy > target:
            beta_lo = beta
            beta = beta * 2.0 if np.isinf(beta_hi) else (beta + beta_hi) / 2.0
        else:
            beta_hi = beta
            beta = beta / 2.0 if beta_lo == 0.0 else (beta + beta_lo) / 2.0
    warnings.warn(f"perplexity calibration did not converge for row "
                  f"{self_index}; entropy={entropy:.6f}, target={target:.6f}")
    return p


def joint_probabilities(X: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized p_ij from per-row calibrated conditionals; sums to 1."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    d2 = _pairwise_sq(X)
    cond = np.zeros((n, n))
    for i in range(n):
        cond[i] = perplexity_calibrate(d2[i], i, perplexity)
    p = (cond + cond.T) / (2.0 * n)
    return p


def _kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / np.maximum(q[mask], 1e-12))))


def tsne(X: np.ndarray, params: TsneParams = TsneParams()) -> Projection:
    """Project rows of X to 2-D; bitwise reproducible for a fixed seed."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 5:
        raise ValueError("need at least 5 rows")
    p = joint_probabilities(X, params.perplexity)
    rng = np.random.default_rng(params.seed)
    coords = rng.normal(scale=1e-4, size=(n, 2))
    velocity = np.zeros_like(coords)
    trace: list[tuple[int, float]] = []
    for iteration in range(1, params.iterations + 1):
        exaggerating = iteration <= params.exaggeration_iters
        p_eff = p * params.early_exaggeration if exaggerating else p
        d2 = _pairwise_sq(coords)
        num = 1.0 / (1.0 + d2)
        np.fill_diagonal(num, 0.0)
        q = num / num.sum()
        force = (p_eff - q) * num
        grad = 4.0 * ((np.diag(force.sum(axis=1)) - force) @ coords)
        if not np.all(np.isfinite(grad)):
            raise RuntimeError(
                f"non-finite t-SNE gradient at iteration {iteration}; "
                f"kl trace so far: {trace}")
        momentum = params.momentum_early if exaggerating else params.momentum_late
        velocity = momentum * velocity - params.learning_rate * grad
        coords = coords + velocity
        coords = coords - coords.mean(axis=0)
        last_ee = iteration == params.exaggeration_iters
        if iteration % params.trace_every == 0 or last_ee \
                or iteration == params.iterations:
            trace.append((iteration, _kl_divergence(p, q)))
    return Projection(coords=coords, params=params, kl_trace=tuple(trace))


def sample_rows(snapshot, max_n: int, seed: int = 0) -> np.ndarray:
    """Seeded uniform row sample (sorted) when len(snapshot) > max_n."""
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    n = len(snapshot)
    if n <= max_n:
        return np.arange(n)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=max_n, replace=False))
