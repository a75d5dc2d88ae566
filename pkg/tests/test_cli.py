import json
from pathlib import Path

import numpy as np
import pytest

from vulnspace import cli, corpus, server

from conftest import FIXTURE_VOCAB, synthetic_feed, write_vec_file


def desk_config(feed: Path, vectors: Path, workdir: Path) -> dict:
    """Desk-scale parameters: small nets, few epochs, full pipeline."""
    return {
        "paths": {"feeds": [str(feed)], "vectors": str(vectors),
                  "workdir": str(workdir)},
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
                   "predicate_hidden": 16, "threshold": 0.9, "max_nodes": 50},
    }


@pytest.fixture(scope="module")
def pipeline_inputs(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    feed = base / "feed.json"
    feed.write_bytes(synthetic_feed(200, seed=3))
    vectors = base / "mini.vec"
    write_vec_file(vectors, FIXTURE_VOCAB, dim=24, seed=7)
    return feed, vectors


def _write_config(path: Path, data: dict) -> Path:
    path.write_text(json.dumps(data, indent=2))
    return path


def test_validate_config_ok(pipeline_inputs, tmp_path, capsys):
    feed, vectors = pipeline_inputs
    cfg_path = _write_config(tmp_path / "config.json",
                             desk_config(feed, vectors, tmp_path / "wd"))
    assert cli.main(["validate-config", "--config", str(cfg_path)]) == 0
    echoed = json.loads(capsys.readouterr().out)
    assert echoed["seed"] == 0
    assert echoed["cluster"]["k"] == 5


def test_validate_config_unknown_key(pipeline_inputs, tmp_path, capsys):
    feed, vectors = pipeline_inputs
    data = desk_config(feed, vectors, tmp_path / "wd")
    data["clustering"] = {}
    cfg_path = _write_config(tmp_path / "config.json", data)
    assert cli.main(["validate-config", "--config", str(cfg_path)]) == 1
    assert "clustering" in capsys.readouterr().err


def test_validate_config_nested_unknown_key(pipeline_inputs, tmp_path, capsys):
    feed, vectors = pipeline_inputs
    data = desk_config(feed, vectors, tmp_path / "wd")
    data["cluster"]["nope"] = 1
    cfg_path = _write_config(tmp_path / "config.json", data)
    assert cli.main(["validate-config", "--config", str(cfg_path)]) == 1
    assert "config.cluster" in capsys.readouterr().err


def test_validate_config_missing_path(pipeline_inputs, tmp_path, capsys):
    feed, vectors = pipeline_inputs
    data = desk_config(feed, vectors, tmp_path / "wd")
    data["paths"]["vectors"] = str(tmp_path / "absent.vec")
    cfg_path = _write_config(tmp_path / "config.json", data)
    assert cli.main(["validate-config", "--config", str(cfg_path)]) == 1
    assert "absent.vec" in capsys.readouterr().err


def test_stage_before_inputs_exits_2(pipeline_inputs, tmp_path, capsys):
    feed, vectors = pipeline_inputs
    data = desk_config(feed, vectors, tmp_path / "wd")
    data["cluster"]["representations"] = ["raw"]
    cfg_path = _write_config(tmp_path / "config.json", data)
    assert cli.main(["ingest", "--config", str(cfg_path)]) == 0
    # cluster before embed: the error names the producing subcommand
    assert cli.main(["cluster", "--config", str(cfg_path)]) == 2
    assert "'embed'" in capsys.readouterr().err


@pytest.fixture(scope="module")
def full_run(pipeline_inputs, tmp_path_factory):
    feed, vectors = pipeline_inputs
    workdir = tmp_path_factory.mktemp("run") / "wd"
    cfg_path = workdir.parent / "config.json"
    _write_config(cfg_path, desk_config(feed, vectors, workdir))
    code = cli.main(["all", "--config", str(cfg_path)])
    assert code == 0
    return workdir, cfg_path


def test_full_chain_artifacts_exist(full_run):
    workdir, _ = full_run
    for name in ("snapshot.vsnp", "audit.csv", "embedding_raw.vemb",
                 "embedding_pca.vemb", "embedding_ae.vemb",
                 "cluster_pca_kmeans.csv", "cluster_pca_ward.csv",
                 "cluster_pca_optics.csv", "classify_reports.json",
                 "projection.csv", "evolution_pca_kmeans.csv",
                 "theory_seed0.vthy", "composability.graphml",
                 "analysis.vbnd", "report.csv", "report.md"):
        assert (workdir / name).exists(), name


def test_full_chain_bundle_serves(full_run):
    workdir, _ = full_run
    analysis = server.load_bundle(workdir / "analysis.vbnd")
    assert len(analysis.snapshot) == 200
    status, meta = server.handle_request(analysis, "/api/meta", {})
    assert status == 200 and meta["rows"] == 200
    status, points = server.handle_request(analysis, "/api/points", {})
    assert len(points["points"]) == 200


def test_full_chain_split_sizes(full_run):
    workdir, _ = full_run
    payload = json.loads((workdir / "classify_reports.json").read_text())
    assert payload["split"] == {"train": 180, "validation": 20}


def test_export_static_from_run(full_run):
    workdir, cfg_path = full_run
    assert cli.main(["export-static", "--config", str(cfg_path)]) == 0
    static = workdir / "static"
    for name in server.STATIC_FILES:
        payload = json.loads((static / name).read_text())
        assert payload is not None
    points = json.loads((static / "points.json").read_text())["points"]
    assert len(points) == 200


def test_report_has_both_sections(full_run):
    workdir, _ = full_run
    report = (workdir / "report.csv").read_text()
    assert "classifier" in report and "clustering" in report
    md = (workdir / "report.md").read_text()
    assert "Classifier results" in md and "Clustering validation" in md
    scores = json.loads((workdir / "report.json").read_text())
    assert scores["classifiers"] and scores["cluster_scores"]
    row = scores["cluster_scores"][0]
    assert {"representation", "method", "task", "nmi", "homogeneity",
            "completeness", "v_measure", "coverage"} <= set(row)


def test_seed_override_changes_outputs(pipeline_inputs, tmp_path):
    feed, vectors = pipeline_inputs
    workdir = tmp_path / "wd"
    cfg_path = _write_config(tmp_path / "config.json",
                             desk_config(feed, vectors, workdir))
    assert cli.main(["ingest", "--config", str(cfg_path)]) == 0
    snap = corpus.load_snapshot(workdir / "snapshot.vsnp")
    a = corpus.split(snap, 0.9, seed=0)[0]
    b = corpus.split(snap, 0.9, seed=99)[0]
    assert not np.array_equal(a, b)
