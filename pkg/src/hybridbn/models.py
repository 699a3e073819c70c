"""Maximum-likelihood node models and the assembled Bayesian network.

The model variant at each node follows from the node's kind and its parents'
kinds: a discrete node gets a conditional probability table over its discrete
parents; a parentless continuous node a Gaussian; a continuous node with only
continuous parents a linear regression with Gaussian residuals; a continuous
node with any discrete parents one such regression per discrete-parent
configuration.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, DiscretizationMap, VariableKind
from .graph import Dag

ABSOLUTE_VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class Cpt:
    cardinality: int
    parent_names: tuple[str, ...]
    rows: dict[tuple[int, ...], np.ndarray]
    fallback: np.ndarray

    def probabilities(self, config: tuple[int, ...]) -> tuple[np.ndarray, bool]:
        """Row for a parent configuration; falls back to the marginal when unseen."""
        row = self.rows.get(config)
        if row is not None:
            return row, False
        return self.fallback, True


@dataclass(frozen=True)
class Gaussian:
    mean: float
    variance: float


@dataclass(frozen=True)
class LinearGaussian:
    intercept: float
    coefficients: tuple[float, ...]
    residual_variance: float
    parent_names: tuple[str, ...] = ()
    ridged: bool = False

    def mean(self, parent_values) -> float:
        return self.intercept + float(
            np.dot(self.coefficients, np.asarray(parent_values, dtype=np.float64))
        )


@dataclass(frozen=True)
class ConditionalLinearGaussian:
    discrete_parents: tuple[str, ...]
    continuous_parents: tuple[str, ...]
    configs: dict[tuple[int, ...], LinearGaussian]
    fallback: Gaussian

    def regression(self, config: tuple[int, ...]) -> tuple[LinearGaussian | None, bool]:
        reg = self.configs.get(config)
        if reg is not None:
            return reg, False
        return None, True


NodeModel = Cpt | Gaussian | LinearGaussian | ConditionalLinearGaussian


@dataclass
class BayesianNetwork:
    dag: Dag
    models: dict[str, NodeModel]
    discretization: list[DiscretizationMap] = field(default_factory=list)

    def __post_init__(self):
        if set(self.models) != set(self.dag.names):
            raise ValueError("models must cover exactly the graph's nodes")

    def labels_for(self, node: str, data_labels: dict) -> tuple[str, ...]:
        return data_labels.get(node, ())


def _variance_floor(data: Dataset) -> float:
    variances = [
        float(np.var(data.column(n)))
        for n in data.continuous_names
        if float(np.var(data.column(n))) > 0.0
    ]
    if not variances:
        return ABSOLUTE_VARIANCE_FLOOR
    return max(ABSOLUTE_VARIANCE_FLOOR, 1e-9 * min(variances))


def _fit_regression(design: np.ndarray, target: np.ndarray, floor: float) -> LinearGaussian:
    """Least-squares fit of target on design columns plus an intercept.

    A rank-deficient design falls back to ridge with lambda scaled to the
    Gram matrix trace; the fit is flagged so diagnostics can surface it.
    """
    n, c = design.shape
    augmented = np.column_stack([np.ones(n), design])
    ridged = False
    solution, _, rank, _ = np.linalg.lstsq(augmented, target, rcond=None)
    if rank < c + 1:
        gram = augmented.T @ augmented
        lam = 1e-8 * float(np.trace(gram))
        solution = np.linalg.solve(gram + lam * np.eye(c + 1), augmented.T @ target)
        ridged = True
    residuals = target - augmented @ solution
    variance = max(float(np.mean(residuals**2)), floor)
    return LinearGaussian(
        intercept=float(solution[0]),
        coefficients=tuple(float(b) for b in solution[1:]),
        residual_variance=variance,
        ridged=ridged,
    )


def _fit_cpt(data: Dataset, node: str, parents, alpha: float) -> Cpt:
    k = data.cardinality(node)
    child = data.column(node)
    counts_marginal = np.bincount(child, minlength=k).astype(np.float64)
    fallback = (counts_marginal + alpha) / (counts_marginal.sum() + alpha * k)
    if not parents:
        return Cpt(k, (), {(): fallback}, fallback)
    codes = data.codes(parents)
    rows = {}
    uniq, inverse = np.unique(codes, axis=0, return_inverse=True)
    for g, config in enumerate(uniq):
        group_counts = np.bincount(child[inverse == g], minlength=k).astype(np.float64)
        rows[tuple(int(c) for c in config)] = (group_counts + alpha) / (
            group_counts.sum() + alpha * k
        )
    return Cpt(k, tuple(parents), rows, fallback)


def _fit_continuous(data: Dataset, node: str, parents, floor: float) -> NodeModel:
    target = data.column(node)
    cont_parents = tuple(p for p in parents if not data.is_discrete(p))
    disc_parents = tuple(p for p in parents if data.is_discrete(p))
    fallback = Gaussian(float(target.mean()), max(float(np.var(target)), floor))
    if not parents:
        return fallback
    if not disc_parents:
        reg = _fit_regression(data.matrix(cont_parents), target, floor)
        return LinearGaussian(
            reg.intercept, reg.coefficients, reg.residual_variance, cont_parents, reg.ridged
        )
    codes = data.codes(disc_parents)
    design = data.matrix(cont_parents) if cont_parents else np.zeros((data.n_rows, 0))
    configs = {}
    uniq, inverse = np.unique(codes, axis=0, return_inverse=True)
    for g, config in enumerate(uniq):
        mask = inverse == g
        reg = _fit_regression(design[mask], target[mask], floor)
        configs[tuple(int(c) for c in config)] = LinearGaussian(
            reg.intercept, reg.coefficients, reg.residual_variance, cont_parents, reg.ridged
        )
    return ConditionalLinearGaussian(disc_parents, cont_parents, configs, fallback)


def fit_parameters(data: Dataset, dag: Dag, alpha: float = 0.0) -> BayesianNetwork:
    """Fit every node's maximum-likelihood model given the graph.

    alpha adds optional Laplace smoothing to conditional probability tables;
    the default 0 keeps pure empirical frequencies.
    """
    if set(dag.names) != set(data.names):
        raise ValueError("graph variables do not match dataset")
    floor = _variance_floor(data)
    models: dict[str, NodeModel] = {}
    for node in dag.names:
        parents = dag.parents(node)
        if data.is_discrete(node):
            disc_only = tuple(p for p in parents if data.is_discrete(p))
            if len(disc_only) != len(parents):
                raise ValueError(f"discrete node {node!r} has continuous parents")
            models[node] = _fit_cpt(data, node, disc_only, alpha)
        else:
            models[node] = _fit_continuous(data, node, parents, floor)
    return BayesianNetwork(dag, models)


def _log_normal(x, mean, variance):
    return -0.5 * (np.log(2.0 * np.pi * variance) + (x - mean) ** 2 / variance)


def local_log_likelihood(model: NodeModel, data: Dataset, node: str, parents) -> float:
    """Sum over rows of the log density/mass of the node under its fitted model."""
    parents = tuple(sorted(parents))
    if isinstance(model, Cpt):
        child = data.column(node)
        if not model.parent_names:
            row = model.rows[()]
            return float(np.sum(np.log(row[child])))
        codes = data.codes(model.parent_names)
        total = 0.0
        for i in range(data.n_rows):
            row, _ = model.probabilities(tuple(int(c) for c in codes[i]))
            total += float(np.log(row[child[i]]))
        return total
    if isinstance(model, Gaussian):
        x = data.column(node)
        return float(np.sum(_log_normal(x, model.mean, model.variance)))
    if isinstance(model, LinearGaussian):
        x = data.column(node)
        design = data.matrix(model.parent_names)
        means = model.intercept + design @ np.asarray(model.coefficients)
        return float(np.sum(_log_normal(x, means, model.residual_variance)))
    if isinstance(model, ConditionalLinearGaussian):
        x = data.column(node)
        codes = data.codes(model.discrete_parents)
        design = (
            data.matrix(model.continuous_parents)
            if model.continuous_parents
            else np.zeros((data.n_rows, 0))
        )
        total = 0.0
        for i in range(data.n_rows):
            reg, unseen = model.regression(tuple(int(c) for c in codes[i]))
            if unseen:
                total += float(_log_normal(x[i], model.fallback.mean, model.fallback.variance))
            else:
                total += float(_log_normal(x[i], reg.mean(design[i]), reg.residual_variance))
        return total
    raise TypeError(f"unknown model type {type(model)!r}")


def network_log_likelihood(bn: BayesianNetwork, data: Dataset) -> float:
    return sum(
        local_log_likelihood(bn.models[node], data, node, bn.dag.parents(node))
        for node in bn.dag.names
    )
