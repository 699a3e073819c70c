import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridbn.data import (
    DataError,
    VariableKind,
    apply_discretization,
    equal_frequency_discretize,
    load_csv,
    load_schema,
    make_dataset,
    train_test_split,
)

D = VariableKind.DISCRETE
C = VariableKind.CONTINUOUS


def write_csv(path, header, rows):
    path.write_text(",".join(header) + "\n" + "\n".join(",".join(r) for r in rows) + "\n")


def test_load_csv_schema_echo(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["a", "b", "c"], [["x", "1.5", "2"], ["y", "0.1", "3"]])
    data = load_csv(p, schema={"a": D, "b": C, "c": C})
    assert data.kinds == (D, C, C)
    assert data.n_rows == 2


def test_load_csv_infers_discrete_from_strings(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["v"], [["x"], ["y"], ["x"]])
    data = load_csv(p)
    assert data.kinds == (D,)
    assert data.cardinality("v") == 2
    assert data.decode("v") == ["x", "y", "x"]


def test_load_csv_infers_continuous_from_numbers(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["v"], [["1.5"], ["2"], ["-3e2"]])
    data = load_csv(p)
    assert data.kinds == (C,)


def test_load_csv_drops_bad_rows_with_warning(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["a", "b"], [["1", "2"], ["", "3"], ["4", "oops"], ["5", "6"]])
    with pytest.warns(UserWarning, match=r"dropped 2 rows.*1, 2"):
        data = load_csv(p, schema={"a": C, "b": C})
    assert data.n_rows == 2
    assert list(data.column("a")) == [1.0, 5.0]


def test_load_csv_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(DataError):
        load_csv(empty)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("a,b\n1,2\n3\n")
    with pytest.raises(DataError, match="fields"):
        load_csv(ragged)
    p = tmp_path / "t.csv"
    write_csv(p, ["a", "b"], [["1", "2"]])
    with pytest.raises(DataError, match="schema does not cover"):
        load_csv(p, schema={"a": C})
    all_bad = tmp_path / "bad.csv"
    write_csv(all_bad, ["a"], [[""], [""]])
    with pytest.raises(DataError, match="no usable rows"), pytest.warns(UserWarning):
        load_csv(all_bad, schema={"a": C})


def test_load_schema(tmp_path):
    p = tmp_path / "schema.csv"
    p.write_text("name,kind\na,discrete\nb,Continuous\n")
    schema = load_schema(p)
    assert schema == {"a": D, "b": C}
    bad = tmp_path / "bad.csv"
    bad.write_text("a,sorta\n")
    with pytest.raises(DataError):
        load_schema(bad)


def test_healthcare_shaped_file(tmp_path):
    from hybridbn.benchmark import SHAPES, generate_clg_network

    _, data = generate_clg_network(SHAPES["healthcare"])
    assert data.n_rows == 3000
    assert len(data.names) == 7
    p = tmp_path / "h.csv"
    rows = []
    for i in range(data.n_rows):
        row = []
        for name in data.names:
            if data.is_discrete(name):
                row.append(data.labels[name][data.column(name)[i]])
            else:
                row.append(f"{data.column(name)[i]:.17g}")
        rows.append(row)
    write_csv(p, data.names, rows)
    loaded = load_csv(p)
    assert loaded.n_rows == 3000
    assert loaded.kinds == data.kinds


@given(
    labels=st.lists(
        st.text(alphabet="abcxyz", min_size=1, max_size=3), min_size=1, max_size=30
    )
)
def test_label_roundtrip(labels):
    data = make_dataset(["v"], [D], {"v": labels})
    assert data.decode("v") == labels


def test_equal_frequency_exact_quantiles():
    data = make_dataset(["v"], [C], {"v": np.arange(1.0, 11.0)})
    binned, maps = equal_frequency_discretize(data, 5)
    assert list(binned.column("v")) == [0, 0, 1, 1, 2, 2, 3, 3, 4, 4]
    assert maps[0].cut_points == (2.0, 4.0, 6.0, 8.0)


def test_equal_frequency_constant_column_warns():
    data = make_dataset(["v"], [C], {"v": [5.0, 5.0, 5.0, 5.0]})
    with pytest.warns(UserWarning, match="ties reduce"):
        binned, maps = equal_frequency_discretize(data, 5)
    assert set(binned.column("v")) == {0}
    assert maps[0].n_bins == 1


def test_equal_frequency_balanced_bins(rng):
    # oracle: sort the sample and count how many land in each quantile slab
    sample = rng.normal(0, 1, 3000)
    data = make_dataset(["v"], [C], {"v": sample})
    binned, _ = equal_frequency_discretize(data, 5)
    counts = np.bincount(binned.column("v"), minlength=5)
    assert counts.tolist() == [600] * 5  # continuous sample: no ties


def test_equal_frequency_errors():
    data = make_dataset(["v"], [C], {"v": [1.0, 2.0]})
    with pytest.raises(DataError):
        equal_frequency_discretize(data, 1)


def test_discretize_then_apply_is_consistent(rng):
    values = rng.normal(0, 2, 500)
    data = make_dataset(["v"], [C], {"v": values})
    binned, maps = equal_frequency_discretize(data, 5)
    reapplied = apply_discretization(data, maps)
    assert np.array_equal(binned.column("v"), reapplied.column("v"))


def test_split_sizes(rng):
    data = make_dataset(["v"], [C], {"v": rng.normal(size=3000)})
    train, test = train_test_split(data, 0.1, seed=1)
    assert (train.n_rows, test.n_rows) == (2700, 300)
    small = make_dataset(["v"], [C], {"v": rng.normal(size=10)})
    a, b = train_test_split(small, 0.5, seed=1)
    assert (a.n_rows, b.n_rows) == (5, 5)


def test_split_deterministic_and_disjoint(rng):
    values = rng.normal(size=100)
    data = make_dataset(["v"], [C], {"v": values})
    t1, s1 = train_test_split(data, 0.25, seed=9)
    t2, s2 = train_test_split(data, 0.25, seed=9)
    assert np.array_equal(t1.column("v"), t2.column("v"))
    assert np.array_equal(s1.column("v"), s2.column("v"))
    merged = sorted(np.concatenate([t1.column("v"), s1.column("v")]).tolist())
    assert merged == sorted(values.tolist())


def test_split_bad_fraction(rng):
    data = make_dataset(["v"], [C], {"v": rng.normal(size=20)})
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DataError):
            train_test_split(data, bad, seed=0)
