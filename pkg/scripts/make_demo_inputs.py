#!/usr/bin/env python3
"""Generate demo inputs: a synthetic NVD 1.1 feed, a small word-vector
file, and a desk-scale pipeline config.

Usage: python scripts/make_demo_inputs.py [--out demo] [--rows 200] [--seed 3]
"""

import argparse
import json
from pathlib import Path

import numpy as np

V2_SETS = {
    "accessVector": ["LOCAL", "ADJACENT_NETWORK", "NETWORK"],
    "accessComplexity": ["HIGH", "MEDIUM", "LOW"],
    "authentication": ["MULTIPLE", "SINGLE", "NONE"],
    "impact": ["NONE", "PARTIAL", "COMPLETE"],
}
V3_SETS = {
    "attackVector": ["NETWORK", "ADJACENT_NETWORK", "LOCAL", "PHYSICAL"],
    "attackComplexity": ["LOW", "HIGH"],
    "privilegesRequired": ["NONE", "LOW", "HIGH"],
    "userInteraction": ["NONE", "REQUIRED"],
    "scope": ["UNCHANGED", "CHANGED"],
    "impact": ["NONE", "LOW", "HIGH"],
}

PRODUCTS = [("microsoft", "windows"), ("apache", "tomcat"), ("oracle", "mysql"),
            ("google", "chrome"), ("mozilla", "firefox"), ("cisco", "ios"),
            ("ibm", "websphere"), ("adobe", "acrobat")]

TEMPLATES = [
    "Buffer overflow in {product} {version} allows remote attackers to "
    "execute arbitrary code via a crafted {noun}.",
    "Cross-site scripting vulnerability in {product} {version} allows "
    "remote attackers to inject arbitrary web script via the {noun} parameter.",
    "SQL injection vulnerability in {product} before {version} allows "
    "remote authenticated users to execute arbitrary SQL commands via the {noun} field.",
    "{product} {version} allows local users to gain privileges via a "
    "crafted {noun} file.",
    "Use-after-free vulnerability in {product} {version} allows attackers "
    "to cause a denial of service via a malformed {noun}.",
]

NOUNS = ["packet", "header", "cookie", "query", "image", "document",
         "certificate", "message", "url", "archive"]

CWES = ["CWE-787", "CWE-79", "CWE-89", "CWE-269", "CWE-416", "CWE-20",
        "NVD-CWE-noinfo"]


def pick(rng, values):
    return values[int(rng.integers(0, len(values)))]


def make_feed(rows: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    items = []
    for k in range(rows):
        year = int(rng.integers(2015, 2021))
        vendor, product = pick(rng, PRODUCTS)
        description = pick(rng, TEMPLATES).format(
            product=product.capitalize(),
            version=f"{int(rng.integers(1, 9))}.{int(rng.integers(0, 9))}",
            noun=pick(rng, NOUNS))
        impact = {
            "baseMetricV2": {
                "cvssV2": {
                    "version": "2.0",
                    "accessVector": pick(rng, V2_SETS["accessVector"]),
                    "accessComplexity": pick(rng, V2_SETS["accessComplexity"]),
                    "authentication": pick(rng, V2_SETS["authentication"]),
                    "confidentialityImpact": pick(rng, V2_SETS["impact"]),
                    "integrityImpact": pick(rng, V2_SETS["impact"]),
                    "availabilityImpact": pick(rng, V2_SETS["impact"]),
                    "baseScore": float(np.round(rng.uniform(1, 10), 1)),
                },
                "severity": "HIGH",
                "obtainAllPrivilege": bool(rng.integers(0, 2)),
                "obtainUserPrivilege": False,
                "obtainOtherPrivilege": False,
                "userInteractionRequired": bool(rng.integers(0, 2)),
            }
        }
        if year >= 2016:
            impact["baseMetricV3"] = {"cvssV3": {
                "version": "3.1",
                "attackVector": pick(rng, V3_SETS["attackVector"]),
                "attackComplexity": pick(rng, V3_SETS["attackComplexity"]),
                "privilegesRequired": pick(rng, V3_SETS["privilegesRequired"]),
                "userInteraction": pick(rng, V3_SETS["userInteraction"]),
                "scope": pick(rng, V3_SETS["scope"]),
                "confidentialityImpact": pick(rng, V3_SETS["impact"]),
                "integrityImpact": pick(rng, V3_SETS["impact"]),
                "availabilityImpact": pick(rng, V3_SETS["impact"]),
                "baseScore": float(np.round(rng.uniform(1, 10), 1)),
            }}
        items.append({
            "cve": {
                "CVE_data_meta": {"ID": f"CVE-{year}-{1000 + k}"},
                "problemtype": {"problemtype_data": [
                    {"description": [{"lang": "en", "value": pick(rng, CWES)}]}]},
                "description": {"description_data": [
                    {"lang": "en", "value": description}]},
            },
            "configurations": {"nodes": [{
                "operator": "OR",
                "cpe_match": [{
                    "vulnerable": True,
                    "cpe23Uri": f"cpe:2.3:a:{vendor}:{product}:1.0:*:*:*:*:*:*:*"}],
            }]},
            "impact": impact,
            "publishedDate": f"{year}-{int(rng.integers(1, 13)):02d}-"
                             f"{int(rng.integers(1, 28)):02d}T12:00Z",
        })
    return {"CVE_data_type": "CVE", "CVE_data_format": "MITRE",
            "CVE_data_version": "4.0", "CVE_Items": items}


def make_vectors(path: Path, dim: int, seed: int) -> None:
    vocab = sorted({w for t in TEMPLATES
                    for w in t.replace("{product}", "x")
                    .replace("{version}", "x").replace("{noun}", "x")
                    .lower().replace(".", " ").replace(",", " ").split()}
                   | {p for _, p in PRODUCTS} | set(NOUNS)
                   | {"cross-site", "use-after-free", "<version>"})
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(vocab)} {dim}\n")
        for token in vocab:
            vec = rng.normal(size=dim)
            vec /= np.linalg.norm(vec)
            fh.write(token + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")


def desk_config(out: Path) -> dict:
    return {
        "paths": {"feeds": [str(out / "feed.json")],
                  "vectors": str(out / "demo.vec"),
                  "workdir": str(out / "workdir")},
        "seed": 0,
        "corpus": {"year_min": 1999, "year_max": 2020, "train_fraction": 0.9},
        "reduce": {"dim": 8, "ae_hidden": [32, 16], "ae_width_scale": 1.0,
                   "epochs": 12, "batch_size": 64, "learning_rate": 3e-3,
                   "dropout": 0.0, "bottleneck_hidden": 16},
        "cluster": {"methods": ["kmeans", "ward", "optics"],
                    "representations": ["pca"], "k": 5, "min_pts": 6,
                    "xi": 0.05},
        "classify": {"representations": ["pca"],
                     "tasks": ["cvss_v2.C", "year"],
                     "models": ["nb", "knn", "logreg", "mlp"],
                     "knn_k": 5, "hidden_width": 16, "depths": [1, 2],
                     "epochs": 25, "batch_size": 64, "learning_rate": 5e-3},
        "project": {"representation": "pca", "perplexity": 12.0,
                    "iterations": 220, "exaggeration_iters": 80,
                    "learning_rate": 100.0, "max_n": 10000},
        "theory": {"representation": "pca", "seeds": [0], "epochs": 60,
                   "batch_size": 64, "learning_rate": 0.05, "rank": 3,
                   "predicate_hidden": 16, "threshold": 0.9, "max_nodes": 100},
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo", type=Path)
    parser.add_argument("--rows", default=200, type=int)
    parser.add_argument("--seed", default=3, type=int)
    parser.add_argument("--dim", default=24, type=int)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "feed.json").write_text(json.dumps(make_feed(args.rows, args.seed)))
    make_vectors(args.out / "demo.vec", args.dim, args.seed + 4)
    (args.out / "config.json").write_text(
        json.dumps(desk_config(args.out), indent=2) + "\n")
    print(f"wrote {args.out}/feed.json ({args.rows} records), "
          f"{args.out}/demo.vec, {args.out}/config.json")
    print(f"next: vulnspace all --config {args.out}/config.json")


if __name__ == "__main__":
    main()
