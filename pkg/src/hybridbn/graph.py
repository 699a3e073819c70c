"""Directed acyclic graphs over typed variables, edge moves, and structure metrics.

Graphs enforce two structural rules everywhere: acyclicity, and the type
constraint that a continuous variable may never be the parent of a discrete
one.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .data import VariableKind


class CycleError(ValueError):
    """Raised when an operation requires an acyclic graph."""


@dataclass(frozen=True)
class Dag:
    names: tuple[str, ...]
    kinds: tuple[VariableKind, ...]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))
        self.validate()

    def validate(self):
        known = set(self.names)
        if len(known) != len(self.names):
            raise ValueError("duplicate variable names")
        kind_of = dict(zip(self.names, self.kinds))
        for u, v in self.edges:
            if u not in known or v not in known:
                raise ValueError(f"edge ({u!r}, {v!r}) references unknown variable")
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            if kind_of[u] is VariableKind.CONTINUOUS and kind_of[v] is VariableKind.DISCRETE:
                raise ValueError(f"continuous {u!r} cannot parent discrete {v!r}")
        self.topological_order()

    def kind_of(self, name: str) -> VariableKind:
        return self.kinds[self.names.index(name)]

    def parents(self, node: str) -> tuple[str, ...]:
        return tuple(sorted(u for u, v in self.edges if v == node))

    def children(self, node: str) -> tuple[str, ...]:
        return tuple(sorted(v for u, v in self.edges if u == node))

    def parent_map(self) -> dict[str, tuple[str, ...]]:
        out = {n: [] for n in self.names}
        for u, v in self.edges:
            out[v].append(u)
        return {n: tuple(sorted(ps)) for n, ps in out.items()}

    def topological_order(self) -> list[str]:
        indeg = {n: 0 for n in self.names}
        for _, v in self.edges:
            indeg[v] += 1
        ready = sorted(n for n, d in indeg.items() if d == 0)
        order = []
        children = {n: [] for n in self.names}
        for u, v in self.edges:
            children[u].append(v)
        while ready:
            node = ready.pop(0)
            order.append(node)
            for child in sorted(children[node]):
                indeg[child] -= 1
                if indeg[child] == 0:
                    ready.append(child)
            ready.sort()
        if len(order) != len(self.names):
            raise CycleError("graph contains a cycle")
        return order

    def has_path(self, source: str, target: str) -> bool:
        """True when a directed path source -> ... -> target exists."""
        if source == target:
            return True
        children = {n: [] for n in self.names}
        for u, v in self.edges:
            children[u].append(v)
        stack = [source]
        seen = set()
        while stack:
            node = stack.pop()
            if node == target:
                return True
            if node in seen:
                continue
            seen.add(node)
            stack.extend(children[node])
        return False


def empty_dag(names, kinds) -> Dag:
    return Dag(tuple(names), tuple(kinds), frozenset())


def dag_from_parent_map(names, kinds, parent_map) -> Dag:
    edges = frozenset((p, child) for child, ps in parent_map.items() for p in ps)
    return Dag(tuple(names), tuple(kinds), edges)


class MoveKind(Enum):
    ADD = "add"
    DELETE = "delete"
    REVERSE = "reverse"


@dataclass(frozen=True, order=True)
class Move:
    kind: MoveKind
    edge: tuple[str, str]

    @property
    def sort_key(self):
        return (self.kind.value, self.edge[0], self.edge[1])


def _edge_type_ok(kinds: dict[str, VariableKind], u: str, v: str) -> bool:
    return not (kinds[u] is VariableKind.CONTINUOUS and kinds[v] is VariableKind.DISCRETE)


def legal_moves(dag: Dag, max_parents: int | None = None) -> list[Move]:
    """All single-edge moves preserving acyclicity, typing, and the parent cap.

    Returned in deterministic (kind, from, to) order.
    """
    kinds = dict(zip(dag.names, dag.kinds))
    n_parents = {n: len(dag.parents(n)) for n in dag.names}
    moves = []
    for u in dag.names:
        for v in dag.names:
            if u == v:
                continue
            edge = (u, v)
            if edge in dag.edges:
                moves.append(Move(MoveKind.DELETE, edge))
                flipped_ok = (
                    _edge_type_ok(kinds, v, u)
                    and (max_parents is None or n_parents[u] + 1 <= max_parents)
                )
                if flipped_ok:
                    trimmed = Dag(dag.names, dag.kinds, dag.edges - {edge})
                    if not trimmed.has_path(u, v):
                        moves.append(Move(MoveKind.REVERSE, edge))
            else:
                if not _edge_type_ok(kinds, u, v):
                    continue
                if max_parents is not None and n_parents[v] + 1 > max_parents:
                    continue
                if dag.has_path(v, u):
                    continue
                moves.append(Move(MoveKind.ADD, edge))
    moves.sort(key=lambda m: m.sort_key)
    return moves


def apply_move(dag: Dag, move: Move) -> Dag:
    u, v = move.edge
    if move.kind is MoveKind.ADD:
        edges = dag.edges | {(u, v)}
    elif move.kind is MoveKind.DELETE:
        edges = dag.edges - {(u, v)}
    else:
        edges = (dag.edges - {(u, v)}) | {(v, u)}
    return Dag(dag.names, dag.kinds, edges)


def _skeleton(dag: Dag) -> set[frozenset]:
    return {frozenset(e) for e in dag.edges}


def shd(learned: Dag, truth: Dag) -> int:
    """Structural Hamming distance: skeleton differences plus orientation flips."""
    sk_l, sk_t = _skeleton(learned), _skeleton(truth)
    distance = len(sk_l ^ sk_t)
    for pair in sk_l & sk_t:
        u, v = sorted(pair)
        if ((u, v) in learned.edges) != ((u, v) in truth.edges):
            distance += 1
    return distance


def skeleton_f1(learned: Dag, truth: Dag) -> float:
    """F1 of the learned undirected adjacency set against the true one."""
    sk_l, sk_t = _skeleton(learned), _skeleton(truth)
    if not sk_l and not sk_t:
        return 1.0
    tp = len(sk_l & sk_t)
    if tp == 0:
        return 0.0
    precision = tp / len(sk_l)
    recall = tp / len(sk_t)
    return 2 * precision * recall / (precision + recall)


def to_dot(dag: Dag) -> str:
    lines = ["digraph bn {"]
    kind_of = dict(zip(dag.names, dag.kinds))
    for name in dag.names:
        shape = "box" if kind_of[name] is VariableKind.DISCRETE else "ellipse"
        lines.append(f'  "{name}" [shape={shape}];')
    for u, v in sorted(dag.edges):
        lines.append(f'  "{u}" -> "{v}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
