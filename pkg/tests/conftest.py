import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

from hybridbn.data import Dataset, VariableKind, make_dataset


def cont_dataset(**columns) -> Dataset:
    names = sorted(columns)
    return make_dataset(
        names, [VariableKind.CONTINUOUS] * len(names), {n: columns[n] for n in names}
    )


def mixed_dataset(cont: dict, disc: dict) -> Dataset:
    names = sorted(cont) + sorted(disc)
    kinds = [VariableKind.CONTINUOUS] * len(cont) + [VariableKind.DISCRETE] * len(disc)
    raw = {**cont, **{k: np.asarray(v, dtype=np.int64) for k, v in disc.items()}}
    return make_dataset(names, kinds, raw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
