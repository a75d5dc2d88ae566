#!/usr/bin/env python3
"""Desk-scale reducer comparison on synthetic labeled data.

Builds a 50-dim dataset whose binary label depends nonlinearly on the
first three coordinates, reduces it with PCA, an autoencoder, and the
supervised bottleneck, then scores held-out kNN accuracy per
representation.  Prints one line per (reducer, trial) and a summary.

Usage: python scripts/compare_reducers.py [--trials 5] [--dim 10]
"""

import argparse

import numpy as np

from vulnspace import classify as cl
from vulnspace import neuralcore as nc
from vulnspace import reduce as rd


def make_data(seed: int, n: int = 700, ambient: int = 50):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, ambient))
    y = ((X[:, :3] ** 2).sum(axis=1) > 2.366).astype(int)
    return X[:500], y[:500], X[500:], y[500:]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=5)
    parser.add_argument("--dim", type=int, default=10)
    parser.add_argument("--knn-k", type=int, default=5)
    args = parser.parse_args()

    results: dict[str, list[float]] = {"pca": [], "ae": [], "bottleneck": []}
    for trial in range(args.trials):
        Xtr, ytr, Xv, yv = make_data(trial)

        pca = rd.pca_fit(Xtr, args.dim)
        ptr = rd.pca_transform(pca, Xtr).matrix
        pv = rd.pca_transform(pca, Xv).matrix
        results["pca"].append(float(np.mean(
            cl.knn_predict(ptr, ytr, pv, args.knn_k) == yv)))

        ae_cfg = rd.AeConfig(hidden=(64, 32), dropout=0.0,
                             train=nc.TrainConfig(epochs=60, batch_size=64,
                                                  learning_rate=3e-3,
                                                  loss="mse", seed=trial))
        encoder, _, _ = rd.ae_fit(Xtr, args.dim, ae_cfg)
        results["ae"].append(float(np.mean(cl.knn_predict(
            rd.encode(encoder, Xtr).matrix, ytr,
            rd.encode(encoder, Xv).matrix, args.knn_k) == yv)))

        bn_cfg = rd.BottleneckConfig(hidden=64, dropout=0.0,
                                     train=nc.TrainConfig(
                                         epochs=250, batch_size=64,
                                         learning_rate=0.01,
                                         loss="cross_entropy", seed=trial))
        model = rd.bottleneck_fit(Xtr, {"label": ytr}, args.dim, bn_cfg)
        results["bottleneck"].append(float(np.mean(cl.knn_predict(
            rd.bottleneck_encode(model, Xtr).matrix, ytr,
            rd.bottleneck_encode(model, Xv).matrix, args.knn_k) == yv)))

        print(f"trial {trial}: " + "  ".join(
            f"{name}={values[-1]:.3f}" for name, values in results.items()))

    print("\nmean held-out kNN accuracy over "
          f"{args.trials} trials (d={args.dim}):")
    for name, values in results.items():
        print(f"  {name:<11} {np.mean(values):.3f} +- {np.std(values):.3f}")


if __name__ == "__main__":
    main()
