import math
from collections import Counter
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import cont_dataset, mixed_dataset
from hybridbn.data import VariableKind, make_dataset
from hybridbn.graph import Dag, empty_dag
from hybridbn.scoring import (
    LOG_2PI_E,
    ParentSet,
    ScoreCache,
    ScoreDiagnostics,
    ScoreKind,
    SingletonPathologyError,
    discrete_entropy,
    gaussian_entropy,
    information_gain,
    local_score,
    mixed_mi,
    network_score,
    group_stats,
)

C = VariableKind.CONTINUOUS
D = VariableKind.DISCRETE


# ---------------------------------------------------------------- oracles

def brute_entropy(columns) -> float:
    """Plug-in joint entropy from an explicit contingency table."""
    joint = Counter(zip(*columns))
    n = sum(joint.values())
    return -sum((c / n) * math.log(c / n) for c in joint.values())


def brute_mi(x, ys) -> float:
    """Classical MI(x; ys) from contingency tables."""
    return brute_entropy([x]) + brute_entropy(ys) - brute_entropy([x] + ys)


# ---------------------------------------------------------- gaussian entropy

def test_gaussian_entropy_closed_forms():
    assert gaussian_entropy([[1.0]]) == pytest.approx(0.5 * LOG_2PI_E, abs=1e-12)
    assert gaussian_entropy(np.eye(2)) == pytest.approx(LOG_2PI_E, abs=1e-12)
    assert gaussian_entropy([[4.0, 0.0], [0.0, 1.0]]) == pytest.approx(
        LOG_2PI_E + 0.5 * math.log(4.0), abs=1e-12
    )


@given(
    st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=1, max_size=5)
)
def test_gaussian_entropy_diagonal(variances):
    d = len(variances)
    expected = 0.5 * (d * LOG_2PI_E + sum(math.log(v) for v in variances))
    assert gaussian_entropy(np.diag(variances)) == pytest.approx(expected, abs=1e-9)


def test_gaussian_entropy_input_validation():
    with pytest.raises(ValueError, match="symmetric"):
        gaussian_entropy([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError, match="square"):
        gaussian_entropy(np.ones((2, 3)))
    with pytest.raises(ValueError, match="non-finite"):
        gaussian_entropy([[np.nan]])


def test_gaussian_entropy_jitter_on_singular():
    diag = ScoreDiagnostics()
    cov = np.array([[1.0, 1.0], [1.0, 1.0]])  # rank one
    value = gaussian_entropy(cov, diag)
    assert math.isfinite(value)
    assert diag.jitter_events == 1


# ---------------------------------------------------------- discrete entropy

def test_discrete_entropy_examples():
    fair = np.array([0] * 500 + [1] * 500)
    assert discrete_entropy([fair]) == pytest.approx(math.log(2), abs=1e-12)
    assert discrete_entropy([np.zeros(10, dtype=int)]) == 0.0
    counts31 = np.array([0, 0, 0, 1])
    expected = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
    assert discrete_entropy([counts31]) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.562335, abs=1e-6)


def test_discrete_entropy_errors():
    with pytest.raises(ValueError):
        discrete_entropy([])
    with pytest.raises(ValueError):
        discrete_entropy([np.array([], dtype=int)])
    with pytest.raises(ValueError):
        discrete_entropy([np.array([0, 1]), np.array([0])])


@given(
    st.integers(1, 3).flatmap(
        lambda k: st.lists(
            st.tuples(*[st.integers(0, 3)] * k), min_size=2, max_size=60
        )
    )
)
def test_discrete_entropy_matches_brute_force(rows):
    columns = [np.array(col) for col in zip(*rows)]
    assert discrete_entropy(columns) == pytest.approx(
        brute_entropy(columns), abs=1e-12
    )


# ------------------------------------------------------------------ mixed MI

def test_mixed_mi_independent_pair(rng):
    x = rng.normal(0, 1, 10000)
    y = rng.integers(0, 2, 10000)
    data = mixed_dataset({"x": x}, {"y": y})
    assert abs(mixed_mi(data, ["x", "y"])) < 0.02


def test_mixed_mi_strong_dependence(rng):
    y = rng.integers(0, 2, 4000)
    x = 10.0 * y + rng.normal(0, 0.1, 4000)
    data = mixed_dataset({"x": x}, {"y": y})
    value = mixed_mi(data, ["x", "y"])
    # oracle: closed form from the sample itself
    full_var = np.var(x)
    group_term = sum(
        (np.mean(y == v)) * 0.5 * (LOG_2PI_E + math.log(np.var(x[y == v])))
        for v in (0, 1)
    )
    expected = 0.5 * (LOG_2PI_E + math.log(full_var)) - group_term
    assert value == pytest.approx(expected, abs=1e-9)
    assert value > 1.0


def test_mixed_mi_all_discrete_perfect_dependence():
    coin = np.array([0, 1] * 200)
    data = mixed_dataset({}, {"x": coin, "y": coin.copy()})
    assert mixed_mi(data, ["x", "y"]) == pytest.approx(math.log(2), abs=1e-12)


def test_mixed_mi_all_continuous_is_joint_entropy(rng):
    x = rng.normal(0, 1, 500)
    y = 0.5 * x + rng.normal(0, 1, 500)
    data = cont_dataset(x=x, y=y)
    cov = np.cov(np.column_stack([x, y]), rowvar=False, bias=True)
    assert mixed_mi(data, ["x", "y"]) == pytest.approx(
        gaussian_entropy(cov), abs=1e-9
    )


def test_mixed_mi_empty_block_errors(rng):
    data = cont_dataset(x=rng.normal(size=10))
    with pytest.raises(ValueError):
        mixed_mi(data, [])


def test_mixed_mi_singleton_pathology(rng):
    # one category appears in a single row: no covariance for that group
    y = np.array([0] * 99 + [1])
    x = rng.normal(0, 1, 100)
    data = mixed_dataset({"x": x}, {"y": y})
    with pytest.raises(SingletonPathologyError):
        mixed_mi(data, ["x", "y"])


def test_group_stats_invariants(rng):
    y = rng.integers(0, 3, 600)
    z = rng.integers(0, 2, 600)
    x = rng.normal(0, 1, 600)
    w = rng.normal(0, 1, 600)
    data = mixed_dataset({"x": x, "w": w}, {"y": y, "z": z})
    stats = group_stats(data, ["x", "w"], ["y", "z"])
    assert sum(s.probability for s in stats) == pytest.approx(1.0, abs=1e-9)
    for s in stats:
        assert np.allclose(s.covariance, s.covariance.T)
        assert s.count >= 1


# -------------------------------------------------------------- local scores

def test_local_score_empty_parents_mi_is_marginal_entropy(rng):
    x = rng.normal(0, 1, 400)
    data = cont_dataset(x=x)
    ls = local_score(data, ParentSet("x", ()), ScoreKind.MI)
    assert ls.value == pytest.approx(mixed_mi(data, ["x"]), abs=1e-12)


def test_local_score_empty_parents_ll_is_zero(rng):
    data = cont_dataset(x=rng.normal(0, 1, 400))
    ls = local_score(data, ParentSet("x", ()), ScoreKind.LL)
    assert ls.value == 0.0


def test_local_score_independent_parent_ll_near_zero(rng):
    x = rng.normal(0, 1, 3000)
    p = rng.integers(0, 3, 3000)
    data = mixed_dataset({"x": x}, {"p": p})
    ls = local_score(data, ParentSet("x", ("p",)), ScoreKind.LL)
    assert abs(ls.value) < 0.01


def test_local_score_all_discrete_matches_contingency_mi(rng):
    x = rng.integers(0, 3, 800)
    p = (x + rng.integers(0, 2, 800)) % 3
    q = rng.integers(0, 2, 800)
    data = mixed_dataset({}, {"x": x, "p": p, "q": q})
    ls = local_score(data, ParentSet("x", ("p", "q")), ScoreKind.LL)
    assert ls.value == pytest.approx(brute_mi(x, [p, q]), abs=1e-12)


def test_local_score_bic_aic_penalties(rng):
    x = rng.normal(0, 1, 500)
    w = rng.normal(0, 1, 500)
    p = rng.integers(0, 3, 500)
    data = mixed_dataset({"x": x, "w": w}, {"p": p})
    n = data.n_rows
    ll = local_score(data, ParentSet("x", ("w", "p")), ScoreKind.LL)
    bic = local_score(data, ParentSet("x", ("w", "p")), ScoreKind.BIC)
    aic = local_score(data, ParentSet("x", ("w", "p")), ScoreKind.AIC)
    params = 3 * (1 + 2)  # q=3 configurations, one slope, intercept, variance
    assert bic.params == params
    assert bic.value == pytest.approx(ll.value - params * math.log(n) / (2 * n), abs=1e-12)
    assert aic.value == pytest.approx(ll.value - params / n, abs=1e-12)
    # discrete child parameter count: q * (k - 1)
    k3 = local_score(data, ParentSet("p", ()), ScoreKind.BIC)
    assert k3.params == 2


def test_singleton_rejected_for_mi_substituted_for_bic(rng):
    y = np.array([0] * 149 + [1])
    x = rng.normal(0, 1, 150)
    data = mixed_dataset({"x": x}, {"y": y})
    mi = local_score(data, ParentSet("x", ("y",)), ScoreKind.MI)
    assert mi.rejected
    ll = local_score(data, ParentSet("x", ("y",)), ScoreKind.LL)
    assert ll.rejected
    cache = ScoreCache(data)
    bic = local_score(data, ParentSet("x", ("y",)), ScoreKind.BIC, cache)
    assert not bic.rejected and math.isfinite(bic.value)
    assert cache.diagnostics.fallback_groups >= 1


def test_cache_transparency(rng):
    x = rng.normal(0, 1, 300)
    w = 0.8 * x + rng.normal(0, 1, 300)
    p = rng.integers(0, 2, 300)
    data = mixed_dataset({"x": x, "w": w}, {"p": p})
    cache = ScoreCache(data)
    for parents in [(), ("x",), ("x", "p"), ("p",)]:
        ps = ParentSet("w", parents)
        for kind in ScoreKind:
            direct = local_score(data, ps, kind)
            cached = local_score(data, ps, kind, cache)
            again = local_score(data, ps, kind, cache)
            assert direct.value == cached.value == again.value
            assert direct.effective == cached.effective


def test_score_decomposability(rng):
    x = rng.normal(0, 1, 400)
    y = 0.7 * x + rng.normal(0, 1, 400)
    z = rng.normal(0, 1, 400)
    data = cont_dataset(x=x, y=y, z=z)
    base = Dag(("x", "y", "z"), (C, C, C), frozenset({("x", "y")}))
    changed = Dag(("x", "y", "z"), (C, C, C), frozenset({("x", "y"), ("x", "z")}))
    s0 = network_score(data, base, ScoreKind.LL)
    s1 = network_score(data, changed, ScoreKind.LL)
    assert s0.local_scores["x"].value == s1.local_scores["x"].value
    assert s0.local_scores["y"].value == s1.local_scores["y"].value
    assert s0.local_scores["z"].value != s1.local_scores["z"].value


def test_network_score_empty_dag(rng):
    x = rng.normal(0, 1, 500)
    p = rng.integers(0, 3, 500)
    data = mixed_dataset({"x": x}, {"p": p})
    dag = empty_dag(tuple(data.names), tuple(data.kinds))
    ll = network_score(data, dag, ScoreKind.LL)
    assert ll.score == 0.0
    mi = network_score(data, dag, ScoreKind.MI)
    expected = mixed_mi(data, ["x"]) + mixed_mi(data, ["p"])
    assert mi.score == pytest.approx(expected, abs=1e-12)


def test_network_score_chain_beats_empty_mi(rng):
    # noise variances around one keep all conditional entropies positive
    a = rng.normal(0, 1, 3000)
    b = 1.2 * a + rng.normal(0, 1.0, 3000)
    c = 0.9 * b + rng.normal(0, 1.0, 3000)
    data = cont_dataset(a=a, b=b, c=c)
    chain = Dag(("a", "b", "c"), (C, C, C), frozenset({("a", "b"), ("b", "c")}))
    empty = empty_dag(("a", "b", "c"), (C, C, C))
    assert (
        network_score(data, chain, ScoreKind.MI).score
        > network_score(data, empty, ScoreKind.MI).score
    )


def test_network_score_rejects_cyclic(rng):
    data = cont_dataset(a=rng.normal(size=20), b=rng.normal(size=20))
    from hybridbn.graph import CycleError

    class FakeDag(Dag):
        def __init__(self):
            pass

    with pytest.raises(CycleError):
        Dag(("a", "b"), (C, C), frozenset({("a", "b"), ("b", "a")}))


def test_rejected_network_propagates(rng):
    y = np.array([0] * 149 + [1])
    x = rng.normal(0, 1, 150)
    data = mixed_dataset({"x": x}, {"y": y})
    dag = Dag(tuple(data.names), tuple(data.kinds), frozenset({("y", "x")}))
    sn = network_score(data, dag, ScoreKind.MI)
    assert sn.rejected
    assert sn.score == float("-inf")


# ----------------------------------------------------------- monotonicity

def _random_mixed_data(rng, n=1200):
    d1 = rng.integers(0, 2, n)
    d2 = rng.integers(0, 3, n)
    d3 = (d1 + rng.integers(0, 2, n)) % 2
    c1 = 0.8 * d1 + rng.normal(0, 1, n)
    c2 = 0.5 * c1 - 0.6 * d2 + rng.normal(0, 1, n)
    c3 = rng.normal(0, 1, n)
    return mixed_dataset({"c1": c1, "c2": c2, "c3": c3}, {"d1": d1, "d2": d2, "d3": d3})


def test_mi_local_score_monotone_under_refinement(rng):
    data = _random_mixed_data(rng)
    names = list(data.names)
    checked = 0
    for _ in range(300):
        node = names[rng.integers(len(names))]
        others = [v for v in names if v != node]
        rng.shuffle(others)
        k = int(rng.integers(1, len(others)))
        subset = tuple(sorted(others[:k]))
        extra = int(rng.integers(1, len(others) - k + 1)) if k < len(others) else 0
        superset = tuple(sorted(others[: k + extra]))
        if subset == superset:
            continue
        small = local_score(data, ParentSet(node, subset), ScoreKind.MI)
        big = local_score(data, ParentSet(node, superset), ScoreKind.MI)
        if small.rejected or big.rejected:
            continue
        assert big.value >= small.value - 1e-9
        checked += 1
    assert checked >= 100


def test_information_gain_nonnegative(rng):
    data = _random_mixed_data(rng)
    names = list(data.names)
    for _ in range(100):
        node = names[rng.integers(len(names))]
        others = [v for v in names if v != node]
        rng.shuffle(others)
        parents = tuple(others[: rng.integers(1, 4)])
        try:
            gain = information_gain(data, node, parents)
        except SingletonPathologyError:
            continue
        assert gain >= -1e-9
