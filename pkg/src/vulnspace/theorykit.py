"""Soft-logic evaluation of a composability theory over the embedding space.

The signature has two populations: Space (any embedding vector, including
synthesized points) and Vul (the known vulnerability rows).  Two learnable
pieces interpret it: a unary existence predicate (small sigmoid MLP) and a
binary composability relation, a low-rank bilinear-plus-linear scorer
symmetrized as sigmoid(f(u,v) + f(v,u)) so symmetry holds exactly.
Averaging two vectors stands in for composing their descriptions.

Product t-norm semantics: conjunction multiplies, negation complements,
implication is the residuum min(1, b / max(a, eps)), and a universally
quantified formula is the mean over its sampled instantiations.  Model
synthesis runs gradient ascent on a bound-normalized sum of per-axiom
satisfactions with a quadratic barrier on violated bounds.

Exported graphs are exploratory leads ranked by a learned relation, not
verified attack chains; the export metadata says so explicitly.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import binio
from . import neuralcore as nc
from .corpus import Snapshot

EPS = 1e-6

CAUTION = ("exploratory output: edges rank candidate compositions by a "
           "learned relation over description embeddings and need expert "
           "filtering before any operational use")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def plus(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Composition in embedding space: the exact average of the operands."""
    return (np.asarray(u, dtype=np.float64) + np.asarray(v, dtype=np.float64)) / 2.0


# ---------------------------------------------------------------------------
# Learnable pieces
# ---------------------------------------------------------------------------


@dataclass
class BilinearRelation:
    """f(u,v) = u^T W1 W2^T v + w.[u;v] + b, scored as sigmoid(f(u,v)+f(v,u))."""

    w1: np.ndarray  # (dim, rank)
    w2: np.ndarray  # (dim, rank)
    w: np.ndarray   # (2*dim,)
    b: float

    @classmethod
    def init(cls, dim: int, rank: int, seed: int) -> "BilinearRelation":
        rng = np.random.default_rng(seed)
        scale = 1.0 / math.sqrt(dim * rank)
        return cls(w1=rng.normal(scale=scale, size=(dim, rank)),
                   w2=rng.normal(scale=scale, size=(dim, rank)),
                   w=rng.normal(scale=1.0 / math.sqrt(dim), size=2 * dim),
                   b=0.0)

    @property
    def dim(self) -> int:
        return self.w1.shape[0]

    def _symmetric_raw(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        left = U @ self.w1
        right = V @ self.w2
        bilinear = np.sum(left * right, axis=1)
        swapped = np.sum((V @ self.w1) * (U @ self.w2), axis=1)
        w_u, w_v = self.w[:self.dim], self.w[self.dim:]
        linear = (U + V) @ (w_u + w_v)
        return bilinear + swapped + linear + 2.0 * self.b

    def score(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        """co(u, v) per row pair; symmetric by construction."""
        U = np.atleast_2d(np.asarray(U, dtype=np.float64))
        V = np.atleast_2d(np.asarray(V, dtype=np.float64))
        return _sigmoid(self._symmetric_raw(U, V))

    def score_with_grads(self, U: np.ndarray, V: np.ndarray,
                         upstream: np.ndarray) -> dict[str, np.ndarray]:
        """Parameter gradients of sum(upstream * co(U, V))."""
        U = np.atleast_2d(np.asarray(U, dtype=np.float64))
        V = np.atleast_2d(np.asarray(V, dtype=np.float64))
        s = self.score(U, V)
        dz = (upstream * s * (1.0 - s))[:, None]
        # d/dW1 of u^T W1 W2^T v + v^T W1 W2^T u  =  u (W2^T v)^T + v (W2^T u)^T
        g_w1 = (U * dz).T @ (V @ self.w2) + (V * dz).T @ (U @ self.w2)
        g_w2 = (V * dz).T @ (U @ self.w1) + (U * dz).T @ (V @ self.w1)
        uv = ((U + V) * dz).sum(axis=0)
        g_w = np.concatenate([uv, uv])
        g_b = float(2.0 * dz.sum())
        return {"w1": g_w1, "w2": g_w2, "w": g_w, "b": g_b}

    def params(self) -> list[np.ndarray]:
        return [self.w1, self.w2, self.w]

    def copy(self) -> "BilinearRelation":
        return BilinearRelation(self.w1.copy(), self.w2.copy(),
                                self.w.copy(), self.b)


def build_predicate(dim: int, hidden: int, seed: int) -> nc.DenseNet:
    return nc.build_net([dim, hidden, 1], ["relu", "sigmoid"], seed=seed)


def predicate_prob(net: nc.DenseNet, X: np.ndarray) -> np.ndarray:
    return nc.forward(net, np.atleast_2d(np.asarray(X, dtype=np.float64))).output[:, 0]


# ---------------------------------------------------------------------------
# Product t-norm connectives and formulas
# ---------------------------------------------------------------------------


def t_and(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a * b


def t_or(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a + b - a * b


def t_not(a: np.ndarray) -> np.ndarray:
    return 1.0 - a


def t_implies(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Goguen residuum min(1, b/a); an antecedent at or below eps is vacuous."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.where(a <= EPS, 1.0, np.minimum(1.0, b / np.maximum(a, EPS)))


class Formula:
    """Closed formula evaluated pointwise over a sample batch."""

    def evaluate(self, model: "TheoryModel", batch: dict[str, np.ndarray]) -> np.ndarray:
        raise NotImplementedError


@dataclass
class Exists(Formula):
    var: str

    def evaluate(self, model, batch):
        return predicate_prob(model.vul_exists, batch[self.var])


@dataclass
class Composable(Formula):
    var_u: str
    var_v: str

    def evaluate(self, model, batch):
        return model.co.score(batch[self.var_u], batch[self.var_v])


@dataclass
class ExistsPlus(Formula):
    var_u: str
    var_v: str

    def evaluate(self, model, batch):
        return predicate_prob(model.vul_exists,
                              plus(batch[self.var_u], batch[self.var_v]))


@dataclass
class Const(Formula):
    value: float

    def evaluate(self, model, batch):
        rows = len(next(iter(batch.values()))) if batch else 1
        return np.full(rows, self.value)


@dataclass
class Not(Formula):
    inner: Formula

    def evaluate(self, model, batch):
        return t_not(self.inner.evaluate(model, batch))


@dataclass
class And(Formula):
    left: Formula
    right: Formula

    def evaluate(self, model, batch):
        return t_and(self.left.evaluate(model, batch),
                     self.right.evaluate(model, batch))


@dataclass
class Or(Formula):
    left: Formula
    right: Formula

    def evaluate(self, model, batch):
        return t_or(self.left.evaluate(model, batch),
                    self.right.evaluate(model, batch))


@dataclass
class Implies(Formula):
    left: Formula
    right: Formula

    def evaluate(self, model, batch):
        return t_implies(self.left.evaluate(model, batch),
                         self.right.evaluate(model, batch))


def soft_satisfaction(formula: Formula, model: "TheoryModel",
                      batch: dict[str, np.ndarray]) -> float:
    """Normalized mean probability of the formula over the batch."""
    values = np.asarray(formula.evaluate(model, batch), dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty sample batch")
    return float(values.mean())


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------

# how each axiom's quantifier is instantiated:
#   vul        -> {"v": rows of Vul}
#   vul_pairs  -> {"u","v": independent rows of Vul}
#   space_pairs-> {"u","v": independent rows of Space}
#   self_pairs -> {"u","v": the same Vul row twice}
BATCH_KINDS = ("vul", "vul_pairs", "space_pairs", "self_pairs")


@dataclass(frozen=True)
class Axiom:
    axiom_id: str
    description: str
    formula: Formula
    bound: float
    batch_kind: str
    structural: bool = False  # holds by construction; reported, not trained

    def __post_init__(self):
        if not 0.0 < self.bound <= 1.0:
            raise ValueError("bound must be in (0, 1]")
        if self.batch_kind not in BATCH_KINDS:
            raise ValueError(f"unknown batch kind {self.batch_kind!r}")


def axiom_library(bounds: dict[str, float] | None = None) -> list[Axiom]:
    """The five shipped axioms; bounds are overridable per axiom id."""
    bounds = bounds or {}

    def bound(key, default):
        return bounds.get(key, default)

    return [
        Axiom("A1", "known vulnerabilities compose with themselves",
              Composable("u", "v"), bound("A1", 0.9), "self_pairs"),
        Axiom("A2", "composability is symmetric (holds by construction)",
              Const(1.0), bound("A2", 1.0), "vul_pairs", structural=True),
        Axiom("A3", "known vulnerabilities exist",
              Exists("v"), bound("A3", 0.95), "vul"),
        Axiom("A4", "composable pairs yield an existing composition",
              Implies(Composable("u", "v"), ExistsPlus("u", "v")),
              bound("A4", 0.7), "vul_pairs"),
        Axiom("A5", "random space pairs are mostly not composable",
              Not(Composable("u", "v")), bound("A5", 0.7), "space_pairs"),
    ]


# ---------------------------------------------------------------------------
# Model synthesis
# ---------------------------------------------------------------------------


@dataclass
class SynthesisConfig:
    epochs: int = 300
    batch_size: int = 128
    learning_rate: float = 0.02
    seed: int = 0
    rank: int = 4
    predicate_hidden: int = 32
    perturb_sigma: float = 0.1
    pair_multiple: int = 2      # sampled averages per row for Space
    axiom_weight: float = 1.0
    barrier_weight: float = 5.0
    eval_samples: int = 2048


@dataclass
class TheoryModel:
    co: BilinearRelation
    vul_exists: nc.DenseNet
    satisfaction: dict[str, float]
    bounds: dict[str, float]
    seed: int
    caution: str = CAUTION


def build_space(embeddings: np.ndarray, cfg: SynthesisConfig,
                rng: np.random.Generator) -> np.ndarray:
    """Space population: rows, sampled pairwise averages, perturbed rows."""
    n = embeddings.shape[0]
    idx_a = rng.integers(0, n, size=cfg.pair_multiple * n)
    idx_b = rng.integers(0, n, size=cfg.pair_multiple * n)
    averages = plus(embeddings[idx_a], embeddings[idx_b])
    perturbed = embeddings + rng.normal(scale=cfg.perturb_sigma,
                                        size=embeddings.shape)
    return np.vstack([embeddings, averages, perturbed])


def _sample_batch(kind: str, embeddings: np.ndarray, space: np.ndarray,
                  size: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    n = embeddings.shape[0]
    if kind == "vul":
        return {"v": embeddings[rng.integers(0, n, size=size)]}
    if kind == "self_pairs":
        rows = embeddings[rng.integers(0, n, size=size)]
        return {"u": rows, "v": rows}
    if kind == "vul_pairs":
        return {"u": embeddings[rng.integers(0, n, size=size)],
                "v": embeddings[rng.integers(0, n, size=size)]}
    if kind == "space_pairs":
        m = space.shape[0]
        return {"u": space[rng.integers(0, m, size=size)],
                "v": space[rng.integers(0, m, size=size)]}
    raise ValueError(kind)


class _AdamArrays:
    """Adam over a plain list of arrays plus one scalar (the relation bias)."""

    def __init__(self, arrays: list[np.ndarray], lr: float):
        self.lr = lr
        self.step = 0
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]
        self.mb = 0.0
        self.vb = 0.0

    def apply(self, arrays: list[np.ndarray], grads: list[np.ndarray],
              bias: float, bias_grad: float) -> float:
        self.step += 1
        b1, b2, eps = 0.9, 0.999, 1e-8
        bc1 = 1.0 - b1 ** self.step
        bc2 = 1.0 - b2 ** self.step
        for i, (a, g) in enumerate(zip(arrays, grads)):
            self.m[i] = b1 * self.m[i] + (1 - b1) * g
            self.v[i] = b2 * self.v[i] + (1 - b2) * g * g
            a += self.lr * (self.m[i] / bc1) / (np.sqrt(self.v[i] / bc2) + eps)
        self.mb = b1 * self.mb + (1 - b1) * bias_grad
        self.vb = b2 * self.vb + (1 - b2) * bias_grad ** 2
        return bias + self.lr * (self.mb / bc1) / (math.sqrt(self.vb / bc2) + eps)


def _axiom_gradient_step(axiom: Axiom, model: TheoryModel,
                         batch: dict[str, np.ndarray], push: float,
                         co_grads: dict[str, np.ndarray],
                         pred_grad_batches: list[tuple[np.ndarray, np.ndarray]]) -> float:
    """Accumulate d(satisfaction)/d(params) * push; returns the satisfaction."""
    size = len(next(iter(batch.values())))
    if axiom.structural:
        return 1.0
    if axiom.axiom_id in ("A1",):
        s = model.co.score(batch["u"], batch["v"])
        upstream = np.full(size, push / size)
        _accumulate(co_grads, model.co.score_with_grads(batch["u"], batch["v"], upstream))
        return float(s.mean())
    if axiom.axiom_id == "A3":
        p = predicate_prob(model.vul_exists, batch["v"])
        pred_grad_batches.append((batch["v"], np.full((size, 1), push / size)))
        return float(p.mean())
    if axiom.axiom_id == "A4":
        c = model.co.score(batch["u"], batch["v"])
        composed = plus(batch["u"], batch["v"])
        e = predicate_prob(model.vul_exists, composed)
        value = t_implies(c, e)
        active = (c > EPS) & (e < c)  # below-one branch of the residuum
        d_e = np.where(active, 1.0 / np.maximum(c, EPS), 0.0) * push / size
        d_c = np.where(active, -e / np.maximum(c, EPS) ** 2, 0.0) * push / size
        _accumulate(co_grads, model.co.score_with_grads(batch["u"], batch["v"], d_c))
        pred_grad_batches.append((composed, d_e[:, None]))
        return float(value.mean())
    if axiom.axiom_id == "A5":
        s = model.co.score(batch["u"], batch["v"])
        upstream = np.full(size, -push / size)  # satisfaction is 1 - mean(co)
        _accumulate(co_grads, model.co.score_with_grads(batch["u"], batch["v"], upstream))
        return float((1.0 - s).mean())
    raise ValueError(f"no gradient rule for axiom {axiom.axiom_id}")


def _accumulate(total: dict[str, np.ndarray], part: dict[str, np.ndarray]) -> None:
    for key, value in part.items():
        total[key] = total.get(key, 0.0) + value


def synthesize(embeddings: np.ndarray, axioms: list[Axiom] | None = None,
               cfg: SynthesisConfig | None = None) -> TheoryModel:
    """Gradient-ascent model synthesis under the axiom bounds.

    Objective: sum over axioms of min(satisfaction/bound, 1), with a
    quadratic barrier added below each bound.  Reported satisfactions come
    from a fresh evaluation sample after training.
    """
    cfg = cfg or SynthesisConfig()
    axioms = axioms if axioms is not None else axiom_library()
    embeddings = np.asarray(embeddings, dtype=np.float64)
    dim = embeddings.shape[1]
    rng = np.random.default_rng(cfg.seed)
    space = build_space(embeddings, cfg, rng)

    model = TheoryModel(
        co=BilinearRelation.init(dim, cfg.rank, cfg.seed),
        vul_exists=build_predicate(dim, cfg.predicate_hidden, cfg.seed + 1),
        satisfaction={}, bounds={a.axiom_id: a.bound for a in axioms},
        seed=cfg.seed)
    adam_co = _AdamArrays(model.co.params(), cfg.learning_rate)
    adam_pred = nc.AdamState(model.vul_exists, nc.TrainConfig(
        epochs=max(cfg.epochs, 1), learning_rate=cfg.learning_rate, seed=cfg.seed))

    for _ in range(cfg.epochs):
        co_grads: dict[str, np.ndarray] = {}
        pred_batches: list[tuple[np.ndarray, np.ndarray]] = []
        for axiom in axioms:
            if axiom.structural:
                continue
            batch = _sample_batch(axiom.batch_kind, embeddings, space,
                                  cfg.batch_size, rng)
            sat = soft_satisfaction(axiom.formula, model, batch)
            if not math.isfinite(sat):
                raise nc.TrainingDivergedError(
                    f"axiom {axiom.axiom_id} satisfaction became non-finite")
            push = 0.0
            if sat < axiom.bound:
                push = cfg.axiom_weight / axiom.bound \
                    + 2.0 * cfg.barrier_weight * (axiom.bound - sat)
            if push > 0.0:
                _axiom_gradient_step(axiom, model, batch, push,
                                     co_grads, pred_batches)
        if co_grads:
            model.co.b = adam_co.apply(
                model.co.params(),
                [co_grads.get("w1", np.zeros_like(model.co.w1)),
                 co_grads.get("w2", np.zeros_like(model.co.w2)),
                 co_grads.get("w", np.zeros_like(model.co.w))],
                model.co.b, float(co_grads.get("b", 0.0)))
        if pred_batches:
            X = np.vstack([x for x, _ in pred_batches])
            upstream = np.vstack([g for _, g in pred_batches])
            fwd = nc.forward(model.vul_exists, X)
            grads = nc.backward_from(model.vul_exists, fwd, -upstream)
            adam_pred.apply(model.vul_exists, grads)  # Adam minimizes: negate

    model.satisfaction = evaluate_axioms(model, embeddings, axioms, cfg,
                                         np.random.default_rng(cfg.seed + 7))
    return model


def evaluate_axioms(model: TheoryModel, embeddings: np.ndarray,
                    axioms: list[Axiom], cfg: SynthesisConfig,
                    rng: np.random.Generator) -> dict[str, float]:
    space = build_space(np.asarray(embeddings, dtype=np.float64), cfg, rng)
    out = {}
    for axiom in axioms:
        if axiom.structural:
            out[axiom.axiom_id] = 1.0
            continue
        batch = _sample_batch(axiom.batch_kind, embeddings, space,
                              cfg.eval_samples, rng)
        out[axiom.axiom_id] = soft_satisfaction(axiom.formula, model, batch)
    return out


def synthesize_many(embeddings: np.ndarray, seeds: list[int],
                    axioms: list[Axiom] | None = None,
                    cfg: SynthesisConfig | None = None) -> list[TheoryModel]:
    """One model per seed; seeds trade the axioms off differently."""
    from dataclasses import replace
    cfg = cfg or SynthesisConfig()
    return [synthesize(embeddings, axioms, replace(cfg, seed=seed))
            for seed in seeds]


# ---------------------------------------------------------------------------
# Composability graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GraphNode:
    row: int
    cve_id: str
    excerpt: str
    degree: int


@dataclass(frozen=True)
class CompositionGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[tuple[int, int, float], ...]  # (row_i, row_j, probability), i < j
    threshold: float
    advisory: str | None = None
    caution: str = CAUTION


EXCERPT_CHARS = 80


def extract_graph(model: TheoryModel, embeddings: np.ndarray,
                  snapshot: Snapshot, threshold: float,
                  max_nodes: int = 1000) -> CompositionGraph:
    """Thresholded relation graph over known rows, truncated to the
    max_nodes highest-degree nodes (ties to the lower row id)."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    if max_nodes < 2:
        raise ValueError("max_nodes must be >= 2")
    embeddings = np.asarray(embeddings, dtype=np.float64)
    n = embeddings.shape[0]
    edges: list[tuple[int, int, float]] = []
    degree = np.zeros(n, dtype=np.int64)
    for i in range(n - 1):
        U = np.repeat(embeddings[i][None, :], n - i - 1, axis=0)
        scores = model.co.score(U, embeddings[i + 1:])
        for offset in np.where(scores >= threshold)[0]:
            j = i + 1 + int(offset)
            edges.append((i, j, float(scores[offset])))
            degree[i] += 1
            degree[j] += 1

    if not edges:
        return CompositionGraph((), (), threshold,
                                advisory="no edges at this threshold")

    ranked = sorted(range(n), key=lambda r: (-degree[r], r))
    kept = set(ranked[:max_nodes])
    kept_edges = tuple(e for e in edges if e[0] in kept and e[1] in kept)
    sub_degree = {r: 0 for r in kept}
    for i, j, _ in kept_edges:
        sub_degree[i] += 1
        sub_degree[j] += 1
    nodes = tuple(GraphNode(row=r,
                            cve_id=snapshot.records[r].id,
                            excerpt=snapshot.records[r].description[:EXCERPT_CHARS],
                            degree=sub_degree[r])
                  for r in sorted(kept))
    return CompositionGraph(nodes, kept_edges, threshold)


GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


def export_graphml(graph: CompositionGraph, path: str | Path) -> None:
    """GraphML 1.0 with node attributes cve_id/excerpt/degree and edge
    attribute probability."""
    ET.register_namespace("", GRAPHML_NS)
    root = ET.Element(f"{{{GRAPHML_NS}}}graphml")
    keys = [("d0", "node", "cve_id", "string"),
            ("d1", "node", "excerpt", "string"),
            ("d2", "node", "degree", "int"),
            ("d3", "edge", "probability", "double"),
            ("d4", "graph", "caution", "string"),
            ("d5", "graph", "threshold", "double")]
    for key_id, domain, name, attr_type in keys:
        ET.SubElement(root, f"{{{GRAPHML_NS}}}key", {
            "id": key_id, "for": domain,
            "attr.name": name, "attr.type": attr_type})
    graph_el = ET.SubElement(root, f"{{{GRAPHML_NS}}}graph",
                             {"id": "composability", "edgedefault": "undirected"})
    caution = ET.SubElement(graph_el, f"{{{GRAPHML_NS}}}data", {"key": "d4"})
    caution.text = graph.caution
    thr = ET.SubElement(graph_el, f"{{{GRAPHML_NS}}}data", {"key": "d5"})
    thr.text = repr(graph.threshold)
    for node in graph.nodes:
        el = ET.SubElement(graph_el, f"{{{GRAPHML_NS}}}node", {"id": f"n{node.row}"})
        for key_id, value in (("d0", node.cve_id), ("d1", node.excerpt),
                              ("d2", str(node.degree))):
            data = ET.SubElement(el, f"{{{GRAPHML_NS}}}data", {"key": key_id})
            data.text = value
    for index, (i, j, probability) in enumerate(graph.edges):
        el = ET.SubElement(graph_el, f"{{{GRAPHML_NS}}}edge", {
            "id": f"e{index}", "source": f"n{i}", "target": f"n{j}"})
        data = ET.SubElement(el, f"{{{GRAPHML_NS}}}data", {"key": "d3"})
        data.text = repr(probability)
    tree = ET.ElementTree(root)
    ET.indent(tree)
    tree.write(path, xml_declaration=True, encoding="UTF-8")


# ---------------------------------------------------------------------------
# VTHY model file
# ---------------------------------------------------------------------------

THEORY_MAGIC = "VTHY"
THEORY_VERSION = 1


def save_theory(model: TheoryModel, path: str | Path) -> None:
    with open(path, "wb") as fh:
        binio.write_magic(fh, THEORY_MAGIC, THEORY_VERSION)
        binio.write_u32(fh, model.seed)
        binio.write_str(fh, model.caution)
        binio.write_f32_matrix(fh, model.co.w1)
        binio.write_f32_matrix(fh, model.co.w2)
        binio.write_f32_matrix(fh, model.co.w.reshape(1, -1))
        binio.write_f64(fh, model.co.b)
        nc.write_net_to(fh, model.vul_exists)
        binio.write_u32(fh, len(model.satisfaction))
        for axiom_id in sorted(model.satisfaction):
            binio.write_str(fh, axiom_id)
            binio.write_f64(fh, model.satisfaction[axiom_id])
            binio.write_f64(fh, model.bounds.get(axiom_id, 1.0))


def load_theory(path: str | Path) -> TheoryModel:
    with open(path, "rb") as fh:
        binio.read_magic(fh, THEORY_MAGIC, THEORY_VERSION)
        seed = binio.read_u32(fh)
        caution = binio.read_str(fh)
        w1 = binio.read_f32_matrix(fh).astype(np.float64)
        w2 = binio.read_f32_matrix(fh).astype(np.float64)
        w = binio.read_f32_matrix(fh).astype(np.float64).ravel()
        b = binio.read_f64(fh)
        net = nc.read_net_from(fh)
        satisfaction = {}
        bounds = {}
        for _ in range(binio.read_u32(fh)):
            axiom_id = binio.read_str(fh)
            satisfaction[axiom_id] = binio.read_f64(fh)
            bounds[axiom_id] = binio.read_f64(fh)
    return TheoryModel(co=BilinearRelation(w1, w2, w, b), vul_exists=net,
                       satisfaction=satisfaction, bounds=bounds, seed=seed,
                       caution=caution)
