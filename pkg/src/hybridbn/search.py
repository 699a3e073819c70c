"""Structure search: greedy Hill-Climbing and an evolutionary walk over DAGs.

Both algorithms maximize the search objective exposed by the scoring module
(the penalized information gain for MI/LL kinds, the BIC/AIC value for the
penalized kinds) while keeping every visited structure acyclic, type-legal,
and free of rejected parent sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, VariableKind
from .graph import (
    Dag,
    Move,
    MoveKind,
    apply_move,
    dag_from_parent_map,
    empty_dag,
    legal_moves,
)
from .scoring import ParentSet, ScoreCache, ScoreKind, ScoredNetwork, network_score

TIE_EPSILON = 1e-9


@dataclass(frozen=True)
class EvoConfig:
    population_size: int = 20
    generations: int = 100
    mutation_rate: float = 0.8
    crossover_rate: float = 0.8
    tournament_size: int = 3
    stagnation_limit: int = 15
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.tournament_size > self.population_size or self.tournament_size < 1:
            raise ValueError("tournament_size must be in [1, population_size]")
        for name in ("mutation_rate", "crossover_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.generations < 0 or self.stagnation_limit < 1:
            raise ValueError("generations must be >= 0 and stagnation_limit >= 1")


def _search_dag(data: Dataset, constraint_kinds=None) -> tuple[tuple, tuple]:
    names = tuple(data.names)
    kinds = tuple(constraint_kinds) if constraint_kinds is not None else tuple(data.kinds)
    return names, kinds


def _effective_local(cache: ScoreCache, kind: ScoreKind, node: str, parents) -> float:
    ls = cache.local(ParentSet(node, tuple(parents)), kind)
    if ls.rejected:
        return float("-inf")
    return ls.effective


def hill_climb(
    data: Dataset,
    kind: ScoreKind = ScoreKind.MI,
    start: Dag | None = None,
    max_parents: int | None = None,
    tie_epsilon: float = TIE_EPSILON,
    min_group_size: int = 2,
    cache: ScoreCache | None = None,
    constraint_kinds=None,
) -> ScoredNetwork:
    """Best-improvement greedy search over add/delete/reverse edge moves.

    Each iteration scores every legal move by the change in the (at most two)
    affected local scores, applies the single best strictly-improving move,
    and stops when no move improves by more than tie_epsilon. Equal-delta
    moves are broken toward the lexicographically smallest (kind, from, to).
    Deterministic for fixed data and start.
    """
    names, kinds = _search_dag(data, constraint_kinds)
    dag = start if start is not None else empty_dag(names, kinds)
    if cache is None:
        cache = ScoreCache(data, min_group_size)
    local = {n: _effective_local(cache, kind, n, dag.parents(n)) for n in names}

    # A rejected local scores -inf; treating it as a huge negative constant
    # lets search escape a rejected start while never stepping into one.
    sentinel = -1e18

    def bounded(value: float) -> float:
        return sentinel if value == float("-inf") else value

    while True:
        candidates = []
        for move in legal_moves(dag, max_parents):
            u, v = move.edge
            if move.kind is MoveKind.ADD:
                new_v = _effective_local(cache, kind, v, dag.parents(v) + (u,))
                if new_v == float("-inf"):
                    continue
                delta = new_v - bounded(local[v])
            elif move.kind is MoveKind.DELETE:
                reduced = tuple(p for p in dag.parents(v) if p != u)
                delta = _effective_local(cache, kind, v, reduced) - bounded(local[v])
            else:
                reduced = tuple(p for p in dag.parents(v) if p != u)
                new_v = _effective_local(cache, kind, v, reduced)
                new_u = _effective_local(cache, kind, u, dag.parents(u) + (v,))
                if new_u == float("-inf"):
                    continue
                delta = (new_v - bounded(local[v])) + (new_u - bounded(local[u]))
            if math.isfinite(delta):
                candidates.append((delta, move))
        if not candidates:
            break
        best_delta = max(d for d, _ in candidates)
        if best_delta <= tie_epsilon:
            break
        best_move = min(
            (m for d, m in candidates if d >= best_delta - tie_epsilon),
            key=lambda m: m.sort_key,
        )
        dag = apply_move(dag, best_move)
        u, v = best_move.edge
        local[v] = _effective_local(cache, kind, v, dag.parents(v))
        if best_move.kind is MoveKind.REVERSE:
            local[u] = _effective_local(cache, kind, u, dag.parents(u))

    return network_score(data, dag, kind, cache, min_group_size)


def _random_dag(names, kinds, rng, max_parents) -> Dag:
    """Sparse random DAG: each legal ordered pair kept with probability 2/p."""
    p_edge = 2.0 / max(len(names), 1)
    kind_of = dict(zip(names, kinds))
    parent_map = {n: [] for n in names}
    pairs = [(u, v) for u in names for v in names if u != v]
    for u, v in pairs:
        if kind_of[u] is VariableKind.CONTINUOUS and kind_of[v] is VariableKind.DISCRETE:
            continue
        if rng.random() < p_edge:
            parent_map[v].append(u)
    dag = _repair(names, kinds, parent_map, rng)
    if max_parents is not None:
        dag = _enforce_parent_cap(dag, max_parents, rng)
    return dag


def _find_cycle_edges(names, parent_map) -> list[tuple[str, str]]:
    """Edges lying on some directed cycle, via iterative DFS back-edge detection."""
    color = {n: 0 for n in names}
    stack_edges: list[tuple[str, str]] = []
    cycle: list[tuple[str, str]] = []
    children = {n: [] for n in names}
    for child, parents in parent_map.items():
        for parent in parents:
            children[parent].append(child)

    for root in names:
        if color[root]:
            continue
        stack = [(root, iter(children[root]))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for child in it:
                if color[child] == 0:
                    stack_edges.append((node, child))
                    color[child] = 1
                    stack.append((child, iter(children[child])))
                    advanced = True
                    break
                if color[child] == 1:
                    # back edge: the cycle is (node -> child) plus the path on the stack
                    cycle = [(node, child)]
                    collecting = False
                    for e in stack_edges:
                        if e[0] == child:
                            collecting = True
                        if collecting:
                            cycle.append(e)
                    return cycle
            if not advanced:
                color[node] = 2
                stack.pop()
                if stack_edges:
                    stack_edges.pop()
    return cycle


def _repair(names, kinds, parent_map, rng) -> Dag:
    """Delete edges on cycles, chosen uniformly, until the graph is acyclic."""
    parent_map = {n: list(ps) for n, ps in parent_map.items()}
    while True:
        cycle_edges = _find_cycle_edges(names, parent_map)
        if not cycle_edges:
            break
        u, v = cycle_edges[rng.integers(len(cycle_edges))]
        parent_map[v].remove(u)
    return dag_from_parent_map(names, kinds, {n: tuple(ps) for n, ps in parent_map.items()})


def _enforce_parent_cap(dag: Dag, max_parents: int, rng) -> Dag:
    parent_map = {n: list(dag.parents(n)) for n in dag.names}
    for node, parents in parent_map.items():
        while len(parents) > max_parents:
            parents.pop(rng.integers(len(parents)))
    return dag_from_parent_map(dag.names, dag.kinds, {n: tuple(ps) for n, ps in parent_map.items()})


def _crossover(a: Dag, b: Dag, rng) -> Dag:
    """Child takes each node's parent set from a uniformly chosen parent graph."""
    parent_map = {}
    for node in a.names:
        source = a if rng.random() < 0.5 else b
        parent_map[node] = list(source.parents(node))
    return _repair(a.names, a.kinds, parent_map, rng)


def _mutate(dag: Dag, rng, max_parents) -> Dag:
    # Usually one uniformly chosen legal move; occasional multi-move bursts
    # (geometric tail) let offspring cross narrow fitness valleys that a
    # single edge change cannot.
    n_moves = 1
    while rng.random() < 0.5:
        n_moves += 1
    for _ in range(n_moves):
        moves = legal_moves(dag, max_parents)
        if not moves:
            break
        dag = apply_move(dag, moves[rng.integers(len(moves))])
    return dag


def evolve(
    data: Dataset,
    kind: ScoreKind = ScoreKind.MI,
    config: EvoConfig | None = None,
    max_parents: int | None = None,
    min_group_size: int = 2,
    cache: ScoreCache | None = None,
    constraint_kinds=None,
) -> ScoredNetwork:
    """Evolutionary structure search.

    Random initial population, tournament selection with single elitism,
    parent-set crossover with cycle repair, and single-move mutation; stops
    after the configured generations or once the best fitness has stagnated.
    Reproducible for a fixed config seed.
    """
    config = config or EvoConfig()
    names, kinds = _search_dag(data, constraint_kinds)
    rng = np.random.default_rng(config.seed)
    if cache is None:
        cache = ScoreCache(data, min_group_size)

    def fitness(dag: Dag) -> float:
        total = 0.0
        for node in names:
            value = _effective_local(cache, kind, node, dag.parents(node))
            if not math.isfinite(value):
                return float("-inf")
            total += value
        return total

    population = [_random_dag(names, kinds, rng, max_parents) for _ in range(config.population_size)]
    scores = [fitness(d) for d in population]

    best_dag, best_score = empty_dag(names, kinds), fitness(empty_dag(names, kinds))
    for dag, s in zip(population, scores):
        if s > best_score:
            best_dag, best_score = dag, s

    stagnant = 0
    for _ in range(config.generations):
        order = np.argsort(scores)[::-1]
        elite = population[int(order[0])]
        next_population = [elite]
        # one fresh immigrant per generation keeps the pool from collapsing
        # onto a single basin
        if config.population_size > 2:
            next_population.append(_random_dag(names, kinds, rng, max_parents))
        while len(next_population) < config.population_size:
            contenders = rng.integers(len(population), size=config.tournament_size)
            first = max(contenders, key=lambda i: scores[int(i)])
            contenders = rng.integers(len(population), size=config.tournament_size)
            second = max(contenders, key=lambda i: scores[int(i)])
            if rng.random() < config.crossover_rate:
                child = _crossover(population[int(first)], population[int(second)], rng)
            else:
                child = population[int(first)]
            if rng.random() < config.mutation_rate:
                child = _mutate(child, rng, max_parents)
            if max_parents is not None:
                child = _enforce_parent_cap(child, max_parents, rng)
            next_population.append(child)
        population = next_population
        scores = [fitness(d) for d in population]
        improved = False
        for dag, s in zip(population, scores):
            if s > best_score + 1e-12:
                best_dag, best_score = dag, s
                improved = True
        stagnant = 0 if improved else stagnant + 1
        if stagnant >= config.stagnation_limit:
            break

    return network_score(data, best_dag, kind, cache, min_group_size)
