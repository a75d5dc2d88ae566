"""Pipeline orchestration: seeded, file-based stages behind one CLI.

Each subcommand reads its input artifacts from the workdir, writes its
outputs atomically (temp file + rename), and echoes its effective
parameters into a sidecar <stage>.meta.json.  Stage outputs are pure
functions of (inputs, config, seed), so reruns reproduce identical bytes;
report and bundle metadata exclude filesystem paths for that reason.

Exit codes: 0 success, 1 stage failure, 2 missing input artifact (the
message names the subcommand that produces it).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classify as cl
from . import clusterkit as ck
from . import corpus
from . import evalkit
from . import neuralcore as nc
from . import projectkit as pk
from . import reduce as rd
from . import server
from . import temporal
from . import textprep
from . import theorykit as tk
from . import wordvec


class ConfigError(ValueError):
    pass


class MissingArtifactError(RuntimeError):
    def __init__(self, path: Path, producer: str):
        super().__init__(f"missing artifact {path.name}: run '{producer}' first")
        self.producer = producer


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class PathsConfig:
    feeds: list[str] = field(default_factory=list)
    vectors: str = ""
    workdir: str = "workdir"
    lexicon: str | None = None


@dataclass
class CorpusConfig:
    year_min: int = 1999
    year_max: int = 2020
    train_fraction: float = 0.9


@dataclass
class TextprepConfig:
    lowercase: bool = True
    url_to_host: bool = True
    version_token: bool = True
    split_punctuation: bool = True
    keep_cve_ids: bool = True
    use_lexicon: bool = True


@dataclass
class WordvecConfig:
    limit: int | None = None
    subwords: str | None = None  # optional VSUB path


@dataclass
class ReduceConfig:
    dim: int = 20
    ae_hidden: list[int] = field(default_factory=lambda: [500, 2000])
    ae_width_scale: float = 1.0
    bottleneck_hidden: int = 256
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    dropout: float = 0.1


@dataclass
class ClusterConfig:
    methods: list[str] = field(default_factory=lambda: ["kmeans", "ward", "optics"])
    representations: list[str] = field(default_factory=lambda: ["pca"])
    k: int | None = None          # default: rows // 30, at least 2
    min_pts: int = 10
    xi: float = 0.05
    eps_cut: float | None = None  # overrides xi extraction when set
    prereduce: bool = True


@dataclass
class ClassifyStageConfig:
    representations: list[str] = field(default_factory=lambda: ["raw", "pca"])
    tasks: list[str] = field(default_factory=lambda: ["cvss_v2.C", "cvss_v3.C", "year"])
    models: list[str] = field(default_factory=lambda: ["nb", "knn", "logreg", "mlp"])
    knn_k: int = 5
    hidden_width: int = 128
    depths: list[int] = field(default_factory=lambda: [1, 2, 3])
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3


@dataclass
class ProjectConfig:
    representation: str = "pca"
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    max_n: int = 10000


@dataclass
class TheoryConfig:
    representation: str = "pca"
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    epochs: int = 300
    batch_size: int = 128
    learning_rate: float = 0.02
    rank: int = 4
    predicate_hidden: int = 32
    threshold: float = 0.9
    max_nodes: int = 1000
    bounds: dict = field(default_factory=dict)


@dataclass
class ServeConfig:
    host: str = "127.0.0.1"
    port: int = 8765


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    seed: int = 0
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    textprep: TextprepConfig = field(default_factory=TextprepConfig)
    wordvec: WordvecConfig = field(default_factory=WordvecConfig)
    reduce: ReduceConfig = field(default_factory=ReduceConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    classify: ClassifyStageConfig = field(default_factory=ClassifyStageConfig)
    project: ProjectConfig = field(default_factory=ProjectConfig)
    theory: TheoryConfig = field(default_factory=TheoryConfig)
    serve: ServeConfig = field(default_factory=ServeConfig)

    @property
    def workdir(self) -> Path:
        return Path(self.paths.workdir)


def _from_dict(cls, data: dict, context: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{context}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        raise ConfigError(f"{context}: unknown key(s) {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        if name in _SECTION_TYPES and cls is PipelineConfig:
            kwargs[name] = _from_dict(_SECTION_TYPES[name], value,
                                      f"{context}.{name}")
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


_SECTION_TYPES = {
    "paths": PathsConfig, "corpus": CorpusConfig, "textprep": TextprepConfig,
    "wordvec": WordvecConfig, "reduce": ReduceConfig, "cluster": ClusterConfig,
    "classify": ClassifyStageConfig, "project": ProjectConfig,
    "theory": TheoryConfig, "serve": ServeConfig,
}


def load_config(path: str | Path) -> PipelineConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return _from_dict(PipelineConfig, data, "config")


def validate_config(path: str | Path) -> tuple[PipelineConfig | None, list[str]]:
    """Normalized config, or the list of problems found."""
    errors: list[str] = []
    try:
        cfg = load_config(path)
    except (ConfigError, OSError) as exc:
        return None, [str(exc)]
    if not cfg.paths.feeds:
        errors.append("paths.feeds: at least one feed file is required")
    for feed in cfg.paths.feeds:
        if not Path(feed).exists():
            errors.append(f"paths.feeds: {feed} does not exist")
    if not cfg.paths.vectors:
        errors.append("paths.vectors: a word-vector file is required")
    elif not Path(cfg.paths.vectors).exists():
        errors.append(f"paths.vectors: {cfg.paths.vectors} does not exist")
    if not 0.0 < cfg.corpus.train_fraction < 1.0:
        errors.append("corpus.train_fraction: must be in (0, 1)")
    return (None, errors) if errors else (cfg, [])


def config_as_dict(cfg: PipelineConfig, include_paths: bool = True) -> dict:
    data = dataclasses.asdict(cfg)
    if not include_paths:
        data.pop("paths")
    return data


# ---------------------------------------------------------------------------
# Artifact helpers
# ---------------------------------------------------------------------------


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _write_json(path: Path, payload: dict) -> None:
    _atomic_write_bytes(path, json.dumps(payload, sort_keys=True,
                                         indent=2).encode("utf-8") + b"\n")


def _write_meta(cfg: PipelineConfig, stage: str, extra: dict) -> None:
    _write_json(cfg.workdir / f"{stage}.meta.json",
                {"stage": stage, "effective_config": config_as_dict(cfg),
                 **extra})


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(path, producer)
    return path


def _snapshot_path(cfg) -> Path:
    return cfg.workdir / "snapshot.vsnp"


def _embedding_path(cfg, tag: str) -> Path:
    return cfg.workdir / f"embedding_{tag}.vemb"


def _assignment_path(cfg, representation: str, method: str) -> Path:
    return cfg.workdir / f"cluster_{representation}_{method}.csv"


def _load_snapshot(cfg) -> corpus.Snapshot:
    return corpus.load_snapshot(_require(_snapshot_path(cfg), "ingest"))


def _load_embedding(cfg, tag: str, producer: str) -> rd.ReducedEmbedding:
    return rd.load_embedding(_require(_embedding_path(cfg, tag), producer))


def _representation_matrix(cfg, name: str) -> np.ndarray:
    producer = "embed" if name == "raw" else "reduce"
    return _load_embedding(cfg, name, producer).matrix


def _load_assignment(cfg, representation: str, method: str) -> ck.ClusterAssignment:
    path = _require(_assignment_path(cfg, representation, method), "cluster")
    meta_path = _require(cfg.workdir / "cluster.meta.json", "cluster")
    meta = json.loads(meta_path.read_text())
    labels = []
    with open(path) as fh:
        reader = csv.reader(fh)
        next(reader)
        for _, label in reader:
            labels.append(int(label))
    labels = np.array(labels, dtype=np.int64)
    k = int(labels.max()) + 1 if np.any(labels != ck.NOISE) else 0
    params = meta["runs"].get(f"{representation}_{method}", {})
    return ck.ClusterAssignment(labels, k, method, params)


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def stage_ingest(cfg: PipelineConfig) -> None:
    records: list[corpus.CveRecord] = []
    sources = []
    diagnostics = 0
    for feed in cfg.paths.feeds:
        feed_path = Path(feed)
        if not feed_path.exists():
            raise MissingArtifactError(feed_path, "(external input)")
        parsed, diags = corpus.load_feed_file(feed_path)
        records.extend(parsed)
        diagnostics += len(diags)
        sources.append((feed_path.name, corpus.file_digest(feed_path)))
    snapshot = corpus.build_snapshot(
        records, (cfg.corpus.year_min, cfg.corpus.year_max), sources)
    buffer = io.BytesIO()
    from .binio import write_magic
    write_magic(buffer, corpus.SNAPSHOT_MAGIC, corpus.SNAPSHOT_VERSION)
    corpus.write_snapshot_to(buffer, snapshot)
    _atomic_write_bytes(_snapshot_path(cfg), buffer.getvalue())
    corpus.export_audit_csv(snapshot, cfg.workdir / "audit.csv")
    _write_meta(cfg, "ingest", {"rows": len(snapshot),
                                "skipped": diagnostics,
                                "years": snapshot.years})


def stage_embed(cfg: PipelineConfig) -> None:
    snapshot = _load_snapshot(cfg)
    vectors_path = Path(cfg.paths.vectors)
    if not vectors_path.exists():
        raise MissingArtifactError(vectors_path, "(external input)")
    store = wordvec.load_vectors(vectors_path, limit=cfg.wordvec.limit)
    if cfg.wordvec.subwords:
        store = wordvec.load_subwords(store, cfg.wordvec.subwords)
    lex = None
    if cfg.textprep.use_lexicon:
        lex = (textprep.PhraseLexicon.from_file(cfg.paths.lexicon)
               if cfg.paths.lexicon else textprep.default_lexicon())
    norm_cfg = textprep.NormalizeConfig(
        lowercase=cfg.textprep.lowercase,
        url_to_host=cfg.textprep.url_to_host,
        version_token=cfg.textprep.version_token,
        split_punctuation=cfg.textprep.split_punctuation,
        keep_cve_ids=cfg.textprep.keep_cve_ids)
    sequences = [textprep.prepare(r.description, lex, norm_cfg)
                 for r in snapshot.records]
    matrix = wordvec.embed_corpus(store, sequences)
    buffer = io.BytesIO()
    from .binio import write_magic, write_str, write_f32_matrix
    write_magic(buffer, rd.EMBEDDING_MAGIC, rd.EMBEDDING_VERSION)
    write_str(buffer, "raw")
    write_f32_matrix(buffer, matrix)
    _atomic_write_bytes(_embedding_path(cfg, "raw"), buffer.getvalue())
    zero_rows = int(np.sum(~matrix.any(axis=1)))
    _write_meta(cfg, "embed", {"rows": matrix.shape[0], "dim": matrix.shape[1],
                               "vocab": len(store.vocab),
                               "zero_embeddings": zero_rows})


def _train_cfg(epochs, batch_size, learning_rate, seed, loss="mse"):
    return nc.TrainConfig(epochs=epochs, batch_size=batch_size,
                          learning_rate=learning_rate, loss=loss, seed=seed)


def stage_reduce(cfg: PipelineConfig) -> None:
    snapshot = _load_snapshot(cfg)
    raw = _load_embedding(cfg, "raw", "embed").matrix
    dim = min(cfg.reduce.dim, raw.shape[1] - 1, len(snapshot) - 1)

    pca_model = rd.pca_fit(raw, dim)
    pca = rd.pca_transform(pca_model, raw)

    ae_cfg = rd.AeConfig(hidden=tuple(cfg.reduce.ae_hidden),
                         width_scale=cfg.reduce.ae_width_scale,
                         dropout=cfg.reduce.dropout,
                         train=_train_cfg(cfg.reduce.epochs, cfg.reduce.batch_size,
                                          cfg.reduce.learning_rate, cfg.seed))
    encoder, decoder, _ = rd.ae_fit(raw, dim, ae_cfg)
    ae = rd.encode(encoder, raw)

    labels = cl.v2_label_arrays(snapshot)
    bn_cfg = rd.BottleneckConfig(hidden=cfg.reduce.bottleneck_hidden,
                                 dropout=cfg.reduce.dropout,
                                 train=_train_cfg(cfg.reduce.epochs,
                                                  cfg.reduce.batch_size,
                                                  cfg.reduce.learning_rate,
                                                  cfg.seed,
                                                  loss="cross_entropy"))
    skipped: tuple[str, ...] = ()
    try:
        bottleneck = rd.bottleneck_fit(raw, labels, dim, bn_cfg)
        mlp = rd.bottleneck_encode(bottleneck, raw)
        skipped = bottleneck.skipped
    except ValueError:
        mlp = None  # fixture with no usable V2 labels

    from .binio import write_magic, write_str, write_f32_matrix
    for tag, reduced in (("pca", pca), ("ae", ae), ("mlp_bottleneck", mlp)):
        if reduced is None:
            continue
        buffer = io.BytesIO()
        write_magic(buffer, rd.EMBEDDING_MAGIC, rd.EMBEDDING_VERSION)
        write_str(buffer, tag)
        write_f32_matrix(buffer, reduced.matrix)
        _atomic_write_bytes(_embedding_path(cfg, tag), buffer.getvalue())
    _write_meta(cfg, "reduce", {
        "dim": dim,
        "explained_variance": [float(v) for v in pca_model.explained_variance],
        "bottleneck_skipped_heads": list(skipped),
        "bottleneck_fitted": mlp is not None})


def stage_cluster(cfg: PipelineConfig) -> None:
    snapshot = _load_snapshot(cfg)
    row_ids = [r.id for r in snapshot.records]
    n = len(snapshot)
    k = cfg.cluster.k or max(2, n // 30)
    runs: dict[str, dict] = {}
    for representation in cfg.cluster.representations:
        X = _representation_matrix(cfg, representation)
        for method in cfg.cluster.methods:
            if method == "kmeans":
                result = ck.kmeans(X, k, seed=cfg.seed)
                assignment = result.assignment
            elif method == "ward":
                assignment, dendrogram = ck.ward(X, target_k=k)
                ck.export_dendrogram_csv(
                    dendrogram, cfg.workdir / f"dendrogram_{representation}.csv")
            elif method == "optics":
                data = ck.prereduce_for_density(X) if cfg.cluster.prereduce else X
                profile, assignment = ck.optics(
                    data, min_pts=min(cfg.cluster.min_pts, max(2, n // 4)),
                    eps_cut=cfg.cluster.eps_cut,
                    xi=None if cfg.cluster.eps_cut is not None else cfg.cluster.xi)
                ck.export_reachability_csv(
                    profile, cfg.workdir / f"reachability_{representation}.csv")
            else:
                raise ConfigError(f"unknown clustering method {method!r}")
            ck.export_assignment_csv(
                assignment, row_ids, _assignment_path(cfg, representation, method))
            runs[f"{representation}_{method}"] = {
                "k": int(assignment.k), "method": method,
                "representation": representation,
                "noise_rows": int(np.sum(assignment.labels == ck.NOISE)),
                **{key: value for key, value in assignment.params.items()
                   if isinstance(value, (int, float, str, bool, type(None)))}}
    _write_meta(cfg, "cluster", {"runs": runs, "target_k": k})


def stage_classify(cfg: PipelineConfig) -> None:
    snapshot = _load_snapshot(cfg)
    tasks = cl.tasks_from_snapshot(snapshot)
    train_idx, val_idx = corpus.split(snapshot, cfg.corpus.train_fraction,
                                      cfg.seed)
    reports: list[dict] = []
    for representation in cfg.classify.representations:
        X = _representation_matrix(cfg, representation)
        for task_name in cfg.classify.tasks:
            if task_name not in tasks:
                raise ConfigError(f"unknown task {task_name!r}")
            task = tasks[task_name]
            y = task.y
            train_rows = train_idx[y[train_idx] != cl.MISSING]
            val_rows = val_idx[y[val_idx] != cl.MISSING]
            if np.unique(y[train_rows]).size < 2 or val_rows.size == 0:
                continue
            n_classes = len(task.classes)
            entries = _fit_models(cfg, X, y, train_rows, val_rows, n_classes)
            for model_name, depth, report in entries:
                reports.append({
                    "representation": representation, "task": task_name,
                    "model": model_name, "depth": depth,
                    **report.as_dict()})
    payload = {"reports": sorted(reports, key=lambda r: (
        r["representation"], r["task"], r["model"], r["depth"] or 0)),
        "split": {"train": int(train_idx.size), "validation": int(val_idx.size)},
        "params": {"knn_k": cfg.classify.knn_k,
                   "hidden_width": cfg.classify.hidden_width,
                   "epochs": cfg.classify.epochs}}
    _write_json(cfg.workdir / "classify_reports.json", payload)
    _write_meta(cfg, "classify", {"report_count": len(reports)})


def _fit_models(cfg, X, y, train_rows, val_rows, n_classes):
    out = []
    X_train, y_train = X[train_rows], y[train_rows]
    X_val, y_val = X[val_rows], y[val_rows]
    models = cfg.classify.models
    if "nb" in models:
        try:
            nb = cl.nb_fit(X_train, y_train)
            out.append(("nb", None, cl.evaluate(cl.nb_predict(nb, X_val),
                                                y_val, n_classes)))
        except ValueError:
            pass
    if "knn" in models:
        k = min(cfg.classify.knn_k, len(train_rows))
        predictions = cl.knn_predict(X_train, y_train, X_val, k)
        out.append(("knn", None, cl.evaluate(predictions, y_val, n_classes)))
    if "logreg" in models:
        logreg_cfg = cl.LogregConfig(train=_train_cfg(
            cfg.classify.epochs, cfg.classify.batch_size,
            cfg.classify.learning_rate, cfg.seed, loss="cross_entropy"))
        net = cl.logreg_fit(X_train, y_train, n_classes, logreg_cfg)
        out.append(("logreg", None, cl.evaluate(cl.logreg_predict(net, X_val),
                                                y_val, n_classes)))
    if "mlp" in models:
        family_cfg = cl.MlpFamilyConfig(
            hidden_width=cfg.classify.hidden_width,
            depths=tuple(cfg.classify.depths),
            train=_train_cfg(cfg.classify.epochs, cfg.classify.batch_size,
                             cfg.classify.learning_rate, cfg.seed,
                             loss="cross_entropy"))
        family = cl.mlp_family_fit(X_train, y_train, X_val, y_val,
                                   n_classes, family_cfg)
        for depth, report in sorted(family.reports.items()):
            out.append(("mlp", depth, report))
    return out


def stage_project(cfg: PipelineConfig) -> None:
    snapshot = _load_snapshot(cfg)
    X = _representation_matrix(cfg, cfg.project.representation)
    rows = pk.sample_rows(snapshot, cfg.project.max_n, seed=cfg.seed)
    params = pk.TsneParams(
        perplexity=min(cfg.project.perplexity, (rows.size - 2) / 3.0),
        iterations=cfg.project.iterations,
        seed=cfg.seed,
        learning_rate=cfg.project.learning_rate,
        early_exaggeration=cfg.project.early_exaggeration,
        exaggeration_iters=cfg.project.exaggeration_iters)
    projection = pk.tsne(X[rows], params)
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["row_id", "x", "y"])
    for offset, row in enumerate(rows):
        writer.writerow([snapshot.records[row].id,
                         f"{projection.coords[offset, 0]:.9g}",
                         f"{projection.coords[offset, 1]:.9g}"])
    _atomic_write_bytes(cfg.workdir / "projection.csv",
                        buffer.getvalue().encode("utf-8"))
    _write_meta(cfg, "project", {
        "rows": int(rows.size),
        "kl_trace": [[i, float(v)] for i, v in projection.kl_trace],
        "sampled": bool(rows.size < len(snapshot))})


def stage_evolve(cfg: PipelineConfig) -> None:
    snapshot = _load_snapshot(cfg)
    written = []
    for representation in cfg.cluster.representations:
        for method in cfg.cluster.methods:
            assignment = _load_assignment(cfg, representation, method)
            series = temporal.evolution(assignment, snapshot)
            path = cfg.workdir / f"evolution_{representation}_{method}.csv"
            temporal.export_evolution_csv(series, path)
            written.append(path.name)
    _write_meta(cfg, "evolve", {"files": written})


def stage_theory(cfg: PipelineConfig) -> None:
    snapshot = _load_snapshot(cfg)
    X = _representation_matrix(cfg, cfg.theory.representation)
    axioms = tk.axiom_library(cfg.theory.bounds or None)
    synth_cfg = tk.SynthesisConfig(
        epochs=cfg.theory.epochs, batch_size=cfg.theory.batch_size,
        learning_rate=cfg.theory.learning_rate, rank=cfg.theory.rank,
        predicate_hidden=cfg.theory.predicate_hidden)
    models = tk.synthesize_many(X, [cfg.seed + s for s in cfg.theory.seeds],
                                axioms, synth_cfg)
    satisfactions = {}
    for model, offset in zip(models, cfg.theory.seeds):
        tk.save_theory(model, cfg.workdir / f"theory_seed{offset}.vthy")
        satisfactions[str(offset)] = {k: round(v, 6)
                                      for k, v in sorted(model.satisfaction.items())}
    # the graph comes from the first model whose axioms look healthiest
    best = max(models, key=lambda m: sum(m.satisfaction.values()))
    graph = tk.extract_graph(best, X, snapshot, cfg.theory.threshold,
                             cfg.theory.max_nodes)
    tk.export_graphml(graph, cfg.workdir / "composability.graphml")
    _write_meta(cfg, "theory", {
        "satisfaction": satisfactions,
        "graph_nodes": len(graph.nodes), "graph_edges": len(graph.edges),
        "caution": tk.CAUTION})


def stage_bundle(cfg: PipelineConfig) -> None:
    snapshot = _load_snapshot(cfg)
    projection_path = _require(cfg.workdir / "projection.csv", "project")
    coords_by_id = {}
    with open(projection_path) as fh:
        reader = csv.reader(fh)
        next(reader)
        for row_id, x, y in reader:
            coords_by_id[row_id] = (float(x), float(y))
    if len(coords_by_id) != len(snapshot):
        raise ConfigError(
            "bundle requires a full (unsampled) projection; set project.max_n "
            f">= {len(snapshot)}")
    coords = np.array([coords_by_id[r.id] for r in snapshot.records])
    spaces = {"raw": _representation_matrix(cfg, "raw")}
    for representation in cfg.cluster.representations:
        if representation != "raw":
            spaces[representation] = _representation_matrix(cfg, representation)
    assignments = {}
    for representation in cfg.cluster.representations:
        for method in cfg.cluster.methods:
            assignments[f"{representation}_{method}"] = \
                _load_assignment(cfg, representation, method)
    graph = None
    graph_meta = cfg.workdir / "theory.meta.json"
    if graph_meta.exists():
        graphml = cfg.workdir / "composability.graphml"
        if graphml.exists():
            # rebuild the graph payload from the persisted best theory model
            theory_files = sorted(cfg.workdir.glob("theory_seed*.vthy"))
            if theory_files:
                models = [tk.load_theory(p) for p in theory_files]
                best = max(models, key=lambda m: sum(m.satisfaction.values()))
                graph = tk.extract_graph(
                    best, _representation_matrix(cfg, cfg.theory.representation),
                    snapshot, cfg.theory.threshold, cfg.theory.max_nodes)
    analysis = server.bundle(
        snapshot, coords, assignments, spaces, graph=graph,
        metadata={"seed": cfg.seed,
                  "config": config_as_dict(cfg, include_paths=False)})
    buffer_path = cfg.workdir / "analysis.vbnd"
    server.save_bundle(analysis, buffer_path)
    _write_meta(cfg, "bundle", {"rows": len(snapshot),
                                "methods": sorted(assignments),
                                "has_graph": graph is not None})


def stage_serve(cfg: PipelineConfig) -> None:
    analysis = server.load_bundle(_require(cfg.workdir / "analysis.vbnd", "bundle"))
    httpd = server.serve(analysis, host=cfg.serve.host, port=cfg.serve.port)
    host, port = httpd.server_address[:2]
    print(f"serving analysis bundle on http://{host}:{port}/api/meta "
          f"({len(analysis.snapshot)} rows); Ctrl-C stops")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        httpd.shutdown()


def stage_export_static(cfg: PipelineConfig) -> None:
    analysis = server.load_bundle(_require(cfg.workdir / "analysis.vbnd", "bundle"))
    written = server.export_static(analysis, cfg.workdir / "static")
    _write_meta(cfg, "export-static", {"files": [p.name for p in written]})


def stage_report(cfg: PipelineConfig) -> None:
    snapshot = _load_snapshot(cfg)
    reports_path = _require(cfg.workdir / "classify_reports.json", "classify")
    classifier_payload = json.loads(reports_path.read_text())
    tasks = cl.tasks_from_snapshot(snapshot)

    cluster_rows = []
    for representation in cfg.cluster.representations:
        for method in cfg.cluster.methods:
            assignment = _load_assignment(cfg, representation, method)
            for task_name in cfg.classify.tasks:
                task = tasks.get(task_name)
                if task is None:
                    continue
                try:
                    scores = evalkit.score(task.y, assignment.labels)
                except evalkit.NothingToScoreError:
                    continue
                cluster_rows.append({
                    "representation": representation, "method": method,
                    "task": task_name,
                    "nmi": round(scores.nmi, 6),
                    "homogeneity": round(scores.homogeneity, 6),
                    "completeness": round(scores.completeness, 6),
                    "v_measure": round(scores.v_measure, 6),
                    "coverage": round(scores.coverage, 6)})

    classifier_rows = [{key: (round(value, 6) if isinstance(value, float) else value)
                        for key, value in row.items()}
                       for row in classifier_payload["reports"]]

    _write_json(cfg.workdir / "report.json",
                {"classifiers": classifier_rows,
                 "cluster_scores": cluster_rows})

    csv_buffer = io.StringIO()
    writer = csv.writer(csv_buffer)
    writer.writerow(["section", "representation", "task", "model_or_method",
                     "depth", "accuracy", "balanced_accuracy", "macro_f1",
                     "nmi", "homogeneity", "completeness", "v_measure",
                     "coverage"])
    for row in classifier_rows:
        writer.writerow(["classifier", row["representation"], row["task"],
                         row["model"], row["depth"] if row["depth"] else "",
                         row["accuracy"], row["balanced_accuracy"],
                         row["macro_f1"], "", "", "", "", ""])
    for row in cluster_rows:
        writer.writerow(["clustering", row["representation"], row["task"],
                         row["method"], "", "", "", "", row["nmi"],
                         row["homogeneity"], row["completeness"],
                         row["v_measure"], row["coverage"]])
    _atomic_write_bytes(cfg.workdir / "report.csv",
                        csv_buffer.getvalue().encode("utf-8"))

    md = io.StringIO()
    md.write("# Analysis report\n\n## Classifier results\n\n")
    md.write("| representation | task | model | depth | accuracy | "
             "balanced accuracy | macro F1 |\n|---|---|---|---|---|---|---|\n")
    for row in classifier_rows:
        md.write(f"| {row['representation']} | {row['task']} | {row['model']} "
                 f"| {row['depth'] or ''} | {row['accuracy']} "
                 f"| {row['balanced_accuracy']} | {row['macro_f1']} |\n")
    md.write("\n## Clustering validation\n\n")
    md.write("| representation | method | task | NMI | homogeneity | "
             "completeness | V-measure | coverage |\n|---|---|---|---|---|---|---|---|\n")
    for row in cluster_rows:
        md.write(f"| {row['representation']} | {row['method']} | {row['task']} "
                 f"| {row['nmi']} | {row['homogeneity']} | {row['completeness']} "
                 f"| {row['v_measure']} | {row['coverage']} |\n")
    _atomic_write_bytes(cfg.workdir / "report.md", md.getvalue().encode("utf-8"))
    _write_meta(cfg, "report", {"classifier_rows": len(classifier_rows),
                                "clustering_rows": len(cluster_rows)})


STAGES = {
    "ingest": stage_ingest,
    "embed": stage_embed,
    "reduce": stage_reduce,
    "cluster": stage_cluster,
    "classify": stage_classify,
    "project": stage_project,
    "evolve": stage_evolve,
    "theory": stage_theory,
    "bundle": stage_bundle,
    "serve": stage_serve,
    "export-static": stage_export_static,
    "report": stage_report,
}

PIPELINE_ORDER = ("ingest", "embed", "reduce", "cluster", "classify",
                  "project", "evolve", "theory", "bundle", "report")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="vulnspace",
        description="vulnerability-space analytics pipeline")
    parser.add_argument("command",
                        choices=list(STAGES) + ["all", "validate-config"])
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--workdir", default=None,
                        help="override paths.workdir")
    args = parser.parse_args(argv)

    if args.command == "validate-config":
        cfg, errors = validate_config(args.config)
        if errors:
            for error in errors:
                print(f"config error: {error}", file=sys.stderr)
            return 1
        print(json.dumps(config_as_dict(cfg), sort_keys=True, indent=2))
        return 0

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        cfg.seed = args.seed
    if args.workdir is not None:
        cfg.paths.workdir = args.workdir
    cfg.workdir.mkdir(parents=True, exist_ok=True)

    commands = PIPELINE_ORDER if args.command == "all" else (args.command,)
    for command in commands:
        try:
            STAGES[command](cfg)
        except MissingArtifactError as exc:
            print(f"{command}: {exc}", file=sys.stderr)
            return 2
        except (ConfigError, ValueError, RuntimeError) as exc:
            print(f"{command}: {exc}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
