"""Entropy-based local and network scores for mixed discrete/continuous data.

All quantities are in nats and are plug-in estimates: empirical frequencies
for discrete blocks, maximum-likelihood (divide by n) covariances with a
Gaussian approximation for continuous blocks.

The building blocks are

* ``discrete_entropy``: joint plug-in entropy of discrete columns,
* ``gaussian_entropy``: differential entropy 0.5 * ln|2*pi*e*Cov| of a
  multivariate normal, computed through a jitter-stabilized Cholesky
  log-determinant,
* ``mixed_mi``: for a variable set split into its continuous block C and
  discrete block D, the estimated dependence H(C) - sum_j P(D=d_j) H(C|d_j);
  a fully continuous set degenerates to its joint Gaussian entropy and a
  fully discrete set to its joint plug-in entropy.

Local scores for a (node, parent set) pair come in four kinds. MI reports
the mutual information between the node and its parent set, computed from
mixed joint entropies (a parentless node reports its own entropy, following
the convention that the information content of a lone set is its entropy).
LL reports the likelihood gain of the conditional model over the node's
marginal model, which is the same mutual information with the parentless
case pinned to zero. BIC and AIC subtract per-observation complexity
penalties from the gain. Because the raw MI and LL estimates never decrease
when a parent is added, structure search ranks candidates by the
BIC-penalized gain (the AIC-penalized one for the AIC kind); the reported
values keep the formulas above.

A discrete-parent configuration too small to support a covariance estimate
(fewer than ``min_group_size`` rows, or not more rows than the continuous
block dimension) is the pathological case: for MI and LL the parent set is
rejected outright, for BIC and AIC the offending group's entropy is replaced
by the full-sample estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .data import Dataset, VariableKind
from .graph import Dag

LOG_2PI_E = math.log(2.0 * math.pi * math.e)


class ScoreKind(Enum):
    MI = "mi"
    LL = "ll"
    BIC = "bic"
    AIC = "aic"


class NumericalError(ArithmeticError):
    """A linear-algebra step failed beyond what jitter can repair."""


class SingletonPathologyError(ValueError):
    """A discrete configuration is too thin for a covariance estimate."""

    def __init__(self, config, count, needed):
        self.config = config
        self.count = count
        self.needed = needed
        super().__init__(
            f"configuration {config} has {count} rows, needs {needed} for a covariance"
        )


@dataclass
class ScoreDiagnostics:
    jitter_events: int = 0
    fallback_groups: int = 0
    rejected_sets: int = 0


@dataclass(frozen=True)
class ParentSet:
    node: str
    parents: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(sorted(self.parents)))
        if self.node in self.parents:
            raise ValueError(f"{self.node!r} cannot be its own parent")

    @property
    def key(self):
        return (self.node, self.parents)


@dataclass(frozen=True)
class LocalScore:
    value: float
    kind: ScoreKind
    rejected: bool = False
    params: int = 0
    effective: float = float("-inf")


@dataclass(frozen=True)
class GroupStats:
    config: tuple[int, ...]
    probability: float
    covariance: np.ndarray
    count: int


@dataclass
class ScoredNetwork:
    dag: Dag
    kind: ScoreKind
    score: float
    local_scores: dict[str, LocalScore]
    rejected: bool = False
    effective: float = float("-inf")


def _stable_logdet(cov: np.ndarray, diagnostics: ScoreDiagnostics | None = None) -> float:
    """log det of a PSD matrix via Cholesky, escalating diagonal jitter on failure."""
    d = cov.shape[0]
    sym = 0.5 * (cov + cov.T)
    scale = float(np.trace(sym)) / d
    base = max(1e-8 * abs(scale), 1e-12)
    jitter = 0.0
    for attempt in range(8):
        try:
            chol = np.linalg.cholesky(sym + jitter * np.eye(d))
            diag = np.diag(chol)
            if np.all(diag > 0.0) and np.all(np.isfinite(diag)):
                if attempt > 0 and diagnostics is not None:
                    diagnostics.jitter_events += 1
                return float(2.0 * np.sum(np.log(diag)))
        except np.linalg.LinAlgError:
            pass
        jitter = base * (10.0 ** attempt)
    raise NumericalError("covariance factorization failed even with jitter")


def gaussian_entropy(covariance, diagnostics: ScoreDiagnostics | None = None) -> float:
    """Differential entropy 0.5 * ln|2*pi*e*Cov| of a multivariate normal."""
    cov = np.atleast_2d(np.asarray(covariance, dtype=np.float64))
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError(f"covariance must be square, got shape {cov.shape}")
    if cov.shape[0] < 1:
        raise ValueError("covariance must have dimension >= 1")
    if not np.all(np.isfinite(cov)):
        raise ValueError("covariance contains non-finite entries")
    tol = 1e-8 * max(1.0, float(np.abs(cov).max()))
    if np.abs(cov - cov.T).max() > tol:
        raise ValueError("covariance must be symmetric")
    d = cov.shape[0]
    return 0.5 * (d * LOG_2PI_E + _stable_logdet(cov, diagnostics))


def discrete_entropy(columns) -> float:
    """Joint plug-in entropy -sum p*ln(p) over the configurations of the columns."""
    cols = [np.asarray(c, dtype=np.int64) for c in columns]
    if not cols:
        raise ValueError("need at least one column")
    n = len(cols[0])
    if n == 0:
        raise ValueError("columns are empty")
    if any(len(c) != n for c in cols):
        raise ValueError("columns must have equal length")
    stacked = np.column_stack(cols)
    _, counts = np.unique(stacked, axis=0, return_counts=True)
    p = counts / n
    return float(-np.sum(p * np.log(p)))


def _mle_cov(matrix: np.ndarray) -> np.ndarray:
    centered = matrix - matrix.mean(axis=0, keepdims=True)
    return centered.T @ centered / matrix.shape[0]


def _partition(data: Dataset, disc_vars) -> tuple[np.ndarray, np.ndarray, list[tuple[int, ...]]]:
    """Group rows by the joint configuration of the given discrete columns."""
    codes = data.codes(disc_vars)
    cards = [data.cardinality(v) for v in disc_vars]
    flat = np.zeros(data.n_rows, dtype=np.int64)
    for j, card in enumerate(cards):
        flat = flat * card + codes[:, j]
    uniq, inverse, counts = np.unique(flat, return_inverse=True, return_counts=True)
    configs = []
    for u in uniq:
        cfg = []
        rem = int(u)
        for card in reversed(cards):
            cfg.append(rem % card)
            rem //= card
        configs.append(tuple(reversed(cfg)))
    return inverse, counts, configs


def group_stats(data: Dataset, continuous_vars, discrete_vars) -> list[GroupStats]:
    """Per discrete-configuration frequency and continuous-block covariance."""
    if not discrete_vars:
        raise ValueError("need at least one discrete variable to group by")
    matrix = data.matrix(continuous_vars) if continuous_vars else None
    inverse, counts, configs = _partition(data, discrete_vars)
    n = data.n_rows
    stats = []
    for g, (count, config) in enumerate(zip(counts, configs)):
        if matrix is not None:
            cov = _mle_cov(matrix[inverse == g])
        else:
            cov = np.zeros((0, 0))
        stats.append(GroupStats(config, count / n, cov, int(count)))
    return stats


def _thin_threshold(min_group_size: int, cont_dim: int) -> int:
    # A group of m rows yields an MLE covariance of rank at most m-1; demand
    # full rank in addition to the configured minimum occupancy.
    return max(min_group_size, cont_dim + 1)


def _grouped_conditional_entropy(
    data: Dataset,
    cont_vars,
    disc_vars,
    min_group_size: int,
    substitute: bool,
    diagnostics: ScoreDiagnostics | None,
) -> float:
    """sum_j P(d_j) * H(C | d_j), with thin groups rejected or substituted."""
    matrix = data.matrix(cont_vars)
    inverse, counts, configs = _partition(data, disc_vars)
    n = data.n_rows
    needed = _thin_threshold(min_group_size, len(cont_vars))
    full_entropy = None
    total = 0.0
    for g, (count, config) in enumerate(zip(counts, configs)):
        p = count / n
        if count < needed:
            if not substitute:
                raise SingletonPathologyError(config, int(count), needed)
            if full_entropy is None:
                full_entropy = gaussian_entropy(_mle_cov(matrix), diagnostics)
            if diagnostics is not None:
                diagnostics.fallback_groups += 1
            total += p * full_entropy
        else:
            total += p * gaussian_entropy(_mle_cov(matrix[inverse == g]), diagnostics)
    return total


def mixed_mi(
    data: Dataset,
    block,
    min_group_size: int = 2,
    diagnostics: ScoreDiagnostics | None = None,
) -> float:
    """Estimated dependence within a variable block.

    The block splits into its continuous part C and discrete part D. A mixed
    block yields H(C) - sum_j P(D=d_j) H(C|d_j); an all-continuous block its
    joint Gaussian entropy; an all-discrete block its joint plug-in entropy.
    Raises SingletonPathologyError when any configuration of D is too thin to
    carry a covariance estimate.
    """
    block = list(block)
    if not block:
        raise ValueError("empty variable block")
    cont = [v for v in block if not data.is_discrete(v)]
    disc = [v for v in block if data.is_discrete(v)]
    if not disc:
        return gaussian_entropy(_mle_cov(data.matrix(cont)), diagnostics)
    if not cont:
        return discrete_entropy([data.column(v) for v in disc])
    marginal = gaussian_entropy(_mle_cov(data.matrix(cont)), diagnostics)
    conditional = _grouped_conditional_entropy(
        data, cont, disc, min_group_size, substitute=False, diagnostics=diagnostics
    )
    return marginal - conditional


def _mixed_joint_entropy(
    data: Dataset,
    variables,
    min_group_size: int,
    substitute: bool,
    diagnostics: ScoreDiagnostics | None,
) -> float:
    """Joint entropy H(D) + sum_j P(d_j) H(C|d_j) of a mixed variable set."""
    cont = [v for v in variables if not data.is_discrete(v)]
    disc = [v for v in variables if data.is_discrete(v)]
    if not cont:
        return discrete_entropy([data.column(v) for v in disc])
    if not disc:
        return gaussian_entropy(_mle_cov(data.matrix(cont)), diagnostics)
    h_disc = discrete_entropy([data.column(v) for v in disc])
    h_cond = _grouped_conditional_entropy(
        data, cont, disc, min_group_size, substitute, diagnostics
    )
    return h_disc + h_cond


def information_gain(
    data: Dataset,
    node: str,
    parents,
    min_group_size: int = 2,
    substitute: bool = False,
    diagnostics: ScoreDiagnostics | None = None,
) -> float:
    """Mutual information between a node and its parent set.

    Computed as H(node) + H(parents) - H(node, parents) with mixed joint
    entropies, which collapses to the classical plug-in MI when everything is
    discrete and to the Gaussian MI when everything is continuous. Empty
    parent sets give 0.
    """
    parents = list(parents)
    if not parents:
        return 0.0
    h_joint = _mixed_joint_entropy(
        data, [node] + parents, min_group_size, substitute, diagnostics
    )
    h_node = _mixed_joint_entropy(data, [node], min_group_size, substitute, diagnostics)
    h_parents = _mixed_joint_entropy(data, parents, min_group_size, substitute, diagnostics)
    return h_node + h_parents - h_joint


def parameter_count(data: Dataset, node: str, parents) -> int:
    """Free parameters of the local conditional model at a node.

    Discrete node with k categories and q discrete-parent configurations:
    q*(k-1). Continuous node with c continuous parents: q*(c+2) for the
    per-configuration intercept, slopes, and variance.
    """
    q = 1
    for p in parents:
        if data.is_discrete(p):
            q *= data.cardinality(p)
    if data.is_discrete(node):
        return q * (data.cardinality(node) - 1)
    c = sum(1 for p in parents if not data.is_discrete(p))
    return q * (c + 2)


class ScoreCache:
    """Memo of local scores keyed by (node, sorted parents, kind).

    Values are pure functions of the bound dataset, so cached and uncached
    evaluation are interchangeable.
    """

    def __init__(self, data: Dataset, min_group_size: int = 2):
        self.data = data
        self.min_group_size = min_group_size
        self.diagnostics = ScoreDiagnostics()
        self._store: dict = {}

    def local(self, ps: ParentSet, kind: ScoreKind) -> LocalScore:
        key = (ps.node, ps.parents, kind)
        hit = self._store.get(key)
        if hit is None:
            hit = _compute_local(self.data, ps, kind, self.min_group_size, self.diagnostics)
            self._store[key] = hit
        return hit


def _compute_local(
    data: Dataset,
    ps: ParentSet,
    kind: ScoreKind,
    min_group_size: int,
    diagnostics: ScoreDiagnostics | None,
) -> LocalScore:
    n = data.n_rows
    params = parameter_count(data, ps.node, ps.parents)
    bic_pen = params * math.log(n) / (2.0 * n)
    aic_pen = params / n
    substitute = kind in (ScoreKind.BIC, ScoreKind.AIC)
    try:
        gain = information_gain(
            data, ps.node, ps.parents, min_group_size, substitute, diagnostics
        )
    except SingletonPathologyError:
        if diagnostics is not None:
            diagnostics.rejected_sets += 1
        return LocalScore(float("nan"), kind, rejected=True, params=params)

    if kind is ScoreKind.MI:
        if ps.parents:
            raw = gain
        else:
            # a parentless family carries its own information content
            raw = _mixed_joint_entropy(data, [ps.node], min_group_size, False, diagnostics)
        effective = gain - bic_pen
    elif kind is ScoreKind.LL:
        raw = gain
        effective = gain - bic_pen
    elif kind is ScoreKind.BIC:
        raw = gain - bic_pen
        effective = raw
    else:
        raw = gain - aic_pen
        effective = raw
    return LocalScore(raw, kind, rejected=False, params=params, effective=effective)


def local_score(
    data: Dataset,
    ps: ParentSet,
    kind: ScoreKind,
    cache: ScoreCache | None = None,
    min_group_size: int = 2,
) -> LocalScore:
    """Score one (node, parent set) pair, memoized when a cache is supplied."""
    for v in (ps.node,) + ps.parents:
        if v not in data.names:
            raise ValueError(f"unknown variable {v!r}")
    if cache is not None:
        return cache.local(ps, kind)
    return _compute_local(data, ps, kind, min_group_size, None)


def network_score(
    data: Dataset,
    dag: Dag,
    kind: ScoreKind,
    cache: ScoreCache | None = None,
    min_group_size: int = 2,
) -> ScoredNetwork:
    """Sum of local scores over the graph's (node, parent set) families."""
    if set(dag.names) != set(data.names):
        raise ValueError("graph variables do not match dataset")
    dag.topological_order()  # raises CycleError on cyclic input
    locals_ = {}
    rejected = False
    for node in dag.names:
        ls = local_score(data, ParentSet(node, dag.parents(node)), kind, cache, min_group_size)
        locals_[node] = ls
        rejected = rejected or ls.rejected
    if rejected:
        return ScoredNetwork(dag, kind, float("-inf"), locals_, rejected=True)
    total = sum(ls.value for ls in locals_.values())
    effective = sum(ls.effective for ls in locals_.values())
    return ScoredNetwork(dag, kind, total, locals_, rejected=False, effective=effective)
