"""Benchmark harness: synthetic network generation, the discretized-vs-mixed
learning matrix, restoration-error comparison, and distribution comparison.

The matrix crosses the structure-learning lane (D = on 5-bin equal-frequency
discretized data, M = directly on mixed data) with the parameter-learning
lane (D = tables over bins, M = the Gaussian/regression taxonomy), giving
the four cells D+D, M+D, D+M, M+M evaluated on one shared train/test split.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import wasserstein_distance

from .data import (
    Dataset,
    VariableKind,
    apply_discretization,
    equal_frequency_discretize,
    train_test_split,
)
from .graph import Dag, shd, skeleton_f1
from .models import BayesianNetwork, fit_parameters
from .sampling import evaluate_restoration, forward_sample
from .scoring import ScoreKind
from .search import EvoConfig, evolve, hill_climb


@dataclass(frozen=True)
class GeneratorSpec:
    """Shape of a synthetic conditional-linear-Gaussian ground-truth network."""

    n_nodes: int
    n_discrete: int
    cardinality: int = 3
    edge_density: float = 0.35
    coef_range: tuple[float, float] = (0.5, 1.5)
    noise_var_range: tuple[float, float] = (0.2, 1.0)
    intercept_scale: float = 2.0
    n_rows: int = 3000
    seed: int = 0

    def __post_init__(self):
        if self.n_discrete > self.n_nodes or self.n_nodes < 1:
            raise ValueError("need 0 <= n_discrete <= n_nodes and n_nodes >= 1")
        if self.cardinality < 2:
            raise ValueError("cardinality must be >= 2")
        if not 0.0 <= self.edge_density <= 1.0:
            raise ValueError("edge_density must lie in [0, 1]")
        if self.n_rows < 1:
            raise ValueError("n_rows must be >= 1")


# Node/observation shapes of the reference mixed benchmark networks.
SHAPES = {
    "healthcare": GeneratorSpec(n_nodes=7, n_discrete=3, cardinality=3, n_rows=3000),
    "sangiovese": GeneratorSpec(n_nodes=15, n_discrete=1, cardinality=3, n_rows=3000),
    "mehra": GeneratorSpec(n_nodes=24, n_discrete=8, cardinality=3, n_rows=3000),
}


def generate_clg_network(spec: GeneratorSpec) -> tuple[BayesianNetwork, Dataset]:
    """Draw a random typed DAG with CLG parameters and forward-sample from it.

    Discrete nodes come first in the generating order so the
    continuous-to-discrete prohibition holds by construction. Table rows are
    Dirichlet(1,..,1), regression slopes are uniform over the coefficient
    range with random sign, and per-configuration intercepts spread the
    groups apart.
    """
    from .models import ConditionalLinearGaussian, Cpt, Gaussian, LinearGaussian

    rng = np.random.default_rng(spec.seed)
    names = [f"d{i + 1}" for i in range(spec.n_discrete)] + [
        f"c{i + 1}" for i in range(spec.n_nodes - spec.n_discrete)
    ]
    kinds = [VariableKind.DISCRETE] * spec.n_discrete + [VariableKind.CONTINUOUS] * (
        spec.n_nodes - spec.n_discrete
    )
    edges = set()
    for i in range(spec.n_nodes):
        for j in range(i + 1, spec.n_nodes):
            if rng.random() < spec.edge_density:
                edges.add((names[i], names[j]))
    dag = Dag(tuple(names), tuple(kinds), frozenset(edges))

    lo, hi = spec.coef_range
    vlo, vhi = spec.noise_var_range
    models = {}
    for node, kind in zip(names, kinds):
        parents = dag.parents(node)
        if kind is VariableKind.DISCRETE:
            k = spec.cardinality
            if not parents:
                row = rng.dirichlet(np.ones(k))
                models[node] = Cpt(k, (), {(): row}, row)
            else:
                cards = [spec.cardinality] * len(parents)
                rows = {}
                for flat in range(int(np.prod(cards))):
                    cfg = []
                    rem = flat
                    for card in reversed(cards):
                        cfg.append(rem % card)
                        rem //= card
                    rows[tuple(reversed(cfg))] = rng.dirichlet(np.ones(k))
                fallback = np.ones(k) / k
                models[node] = Cpt(k, tuple(parents), rows, fallback)
        else:
            cont_parents = tuple(p for p in parents if dag.kind_of(p) is VariableKind.CONTINUOUS)
            disc_parents = tuple(p for p in parents if dag.kind_of(p) is VariableKind.DISCRETE)
            # one sign per (child, parent) pair, shared across configurations,
            # so a parent's influence keeps a consistent direction
            signs = {p: float(rng.choice([-1.0, 1.0])) for p in cont_parents}

            def draw_regression():
                coefs = tuple(float(rng.uniform(lo, hi)) * signs[p] for p in cont_parents)
                return LinearGaussian(
                    intercept=float(rng.uniform(-spec.intercept_scale, spec.intercept_scale)),
                    coefficients=coefs,
                    residual_variance=float(rng.uniform(vlo, vhi)),
                    parent_names=cont_parents,
                )

            if not parents:
                models[node] = Gaussian(
                    float(rng.uniform(-spec.intercept_scale, spec.intercept_scale)),
                    float(rng.uniform(vlo, vhi)),
                )
            elif not disc_parents:
                models[node] = draw_regression()
            else:
                cards = [spec.cardinality] * len(disc_parents)
                configs = {}
                for flat in range(int(np.prod(cards))):
                    cfg = []
                    rem = flat
                    for card in reversed(cards):
                        cfg.append(rem % card)
                        rem //= card
                    configs[tuple(reversed(cfg))] = draw_regression()
                fallback = Gaussian(0.0, float(np.mean([vlo, vhi])))
                models[node] = ConditionalLinearGaussian(
                    disc_parents, cont_parents, configs, fallback
                )
    bn = BayesianNetwork(dag, models)
    data = forward_sample(bn, spec.n_rows, seed=spec.seed + 1)
    return bn, data


@dataclass
class CellResult:
    cell: str
    dag: Dag
    seconds: float
    metrics: dict[str, tuple[str, float]]  # node -> (metric kind, value)
    shd: int | None = None
    skeleton_f1: float | None = None
    fallbacks: int = 0


@dataclass
class MatrixResult:
    search: str
    seed: int
    cells: dict[str, CellResult]
    error_reduction: dict[str, dict[str, float]]  # node -> cell -> percent
    degenerate: bool = False


def _structure(data: Dataset, search: str, kind: ScoreKind, seed: int, evo: EvoConfig | None,
               max_parents, constraint_kinds) -> tuple[Dag, float]:
    start = time.perf_counter()
    if search == "hc":
        result = hill_climb(data, kind, max_parents=max_parents, constraint_kinds=constraint_kinds)
    elif search == "evo":
        config = dataclasses.replace(evo or EvoConfig(), seed=seed)
        result = evolve(data, kind, config, max_parents=max_parents,
                        constraint_kinds=constraint_kinds)
    else:
        raise ValueError(f"unknown search algorithm {search!r}")
    return result.dag, time.perf_counter() - start


def run_matrix(
    data: Dataset,
    ground_truth: BayesianNetwork | None = None,
    search: str = "hc",
    seed: int = 0,
    bins: int = 5,
    kind: ScoreKind = ScoreKind.MI,
    strategy: str = "sample",
    test_fraction: float = 0.1,
    evo: EvoConfig | None = None,
    max_parents: int | None = None,
) -> MatrixResult:
    """Evaluate all four structure/parameter lane combinations on one split.

    Every cell consumes the identical train/test partition and the identical
    single-cell deletion protocol; per-node restoration errors feed the
    percentage-reduction table against the D+D baseline.
    """
    degenerate = False
    if not data.continuous_names or not data.discrete_names:
        warnings.warn("data is not mixed; the learning matrix is degenerate")
        degenerate = True
    sub_seeds = np.random.SeedSequence(seed).generate_state(3)
    train, test = train_test_split(data, test_fraction, int(sub_seeds[0]))
    disc_train, maps = equal_frequency_discretize(train, bins)

    dag_d, secs_d = _structure(
        disc_train, search, kind, int(sub_seeds[1]), evo, max_parents, train.kinds
    )
    dag_m, secs_m = _structure(
        train, search, kind, int(sub_seeds[1]), evo, max_parents, None
    )

    impute_seed = int(sub_seeds[2])
    cells: dict[str, CellResult] = {}
    for cell, dag, secs in (
        ("D+D", dag_d, secs_d),
        ("M+D", dag_m, secs_m),
        ("D+M", dag_d, secs_d),
        ("M+M", dag_m, secs_m),
    ):
        if cell.endswith("D"):
            bn = fit_parameters(disc_train, dag)
            bn.discretization = list(maps)
        else:
            bn = fit_parameters(train, dag)
        report = evaluate_restoration(bn, test, impute_seed, strategy=strategy)
        metrics = {
            node: (r.metric, r.value) for node, r in report.per_variable.items()
        }
        result = CellResult(cell, dag, secs, metrics, fallbacks=report.total_fallbacks)
        if ground_truth is not None:
            result.shd = shd(dag, ground_truth.dag)
            result.skeleton_f1 = skeleton_f1(dag, ground_truth.dag)
        cells[cell] = result

    reduction: dict[str, dict[str, float]] = {}
    for node in data.continuous_names:
        base = cells["D+D"].metrics[node][1]
        reduction[node] = {}
        for cell in ("M+D", "D+M", "M+M"):
            value = cells[cell].metrics[node][1]
            reduction[node][cell] = (
                100.0 * (base - value) / base if base > 0 else 0.0
            )
    return MatrixResult(search, seed, cells, reduction, degenerate)


@dataclass
class DistributionComparison:
    node: str
    metric: str  # "wasserstein" or "total_variation"
    distance: float
    bin_edges: np.ndarray | None
    reference_counts: np.ndarray
    sampled_counts: np.ndarray


def compare_distributions(
    bn: BayesianNetwork,
    reference: Dataset,
    node: str,
    n_samples: int = 10000,
    seed: int = 0,
    n_bins: int = 30,
) -> DistributionComparison:
    """Forward-sample the network and compare one node's marginal to reference data."""
    if node not in reference.names:
        raise ValueError(f"unknown node {node!r}")
    if reference.n_rows == 0:
        raise ValueError("reference dataset is empty")
    sample = forward_sample(bn, n_samples, seed)
    ref_col = reference.column(node)
    sm_col = sample.column(node)
    if reference.is_discrete(node):
        k = max(reference.cardinality(node), int(sm_col.max()) + 1 if len(sm_col) else 1)
        ref_counts = np.bincount(ref_col, minlength=k)
        sm_counts = np.bincount(sm_col.astype(np.int64), minlength=k)
        tv = 0.5 * float(
            np.abs(ref_counts / ref_counts.sum() - sm_counts / sm_counts.sum()).sum()
        )
        return DistributionComparison(node, "total_variation", tv, None, ref_counts, sm_counts)
    lo = min(ref_col.min(), sm_col.min())
    hi = max(ref_col.max(), sm_col.max())
    edges = np.linspace(lo, hi, n_bins + 1)
    ref_counts, _ = np.histogram(ref_col, bins=edges)
    sm_counts, _ = np.histogram(sm_col, bins=edges)
    distance = float(wasserstein_distance(ref_col, sm_col))
    return DistributionComparison(node, "wasserstein", distance, edges, ref_counts, sm_counts)


def write_matrix_csv(results: list[MatrixResult], path):
    """Long-format per-node metrics: one row per (seed, search, cell, node)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "search", "cell", "node", "metric", "value"])
        for result in results:
            for cell in ("D+D", "M+D", "D+M", "M+M"):
                cr = result.cells[cell]
                for node in sorted(cr.metrics):
                    metric, value = cr.metrics[node]
                    writer.writerow(
                        [result.seed, result.search, cell, node, metric, f"{value:.17g}"]
                    )


def matrix_summary(results: list[MatrixResult]) -> dict:
    """Aggregate error-reduction percentages and structure metrics across runs."""
    summary: dict = {"runs": len(results), "cells": {}, "error_reduction": {}}
    for cell in ("D+D", "M+D", "D+M", "M+M"):
        entries = [r.cells[cell] for r in results]
        cell_info = {
            "mean_shd": (
                float(np.mean([e.shd for e in entries]))
                if all(e.shd is not None for e in entries)
                else None
            ),
            "mean_skeleton_f1": (
                float(np.mean([e.skeleton_f1 for e in entries]))
                if all(e.skeleton_f1 is not None for e in entries)
                else None
            ),
        }
        summary["cells"][cell] = cell_info
    nodes = sorted({n for r in results for n in r.error_reduction})
    for node in nodes:
        summary["error_reduction"][node] = {}
        for cell in ("M+D", "D+M", "M+M"):
            values = [
                r.error_reduction[node][cell] for r in results if node in r.error_reduction
            ]
            summary["error_reduction"][node][cell] = {
                "mean": float(np.mean(values)),
                "spread": float(np.std(values)),
            }
    return summary


def write_summary_json(summary: dict, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def format_reduction_table(summary: dict) -> str:
    """Plain-text table of percent error reduction vs the D+D baseline."""
    lines = ["node        M+D        D+M        M+M  (percent error reduction vs D+D)"]
    for node, cells in sorted(summary["error_reduction"].items()):
        lines.append(
            f"{node:<8}"
            + "".join(f"{cells[c]['mean']:>11.2f}" for c in ("M+D", "D+M", "M+M"))
        )
    return "\n".join(lines)
