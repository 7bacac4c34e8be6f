import numpy as np
import pytest

from fairauc.moments import GroupedColumns


def make_columns(features, group, label, names=None):
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return GroupedColumns(x, np.asarray(group), np.asarray(label), names or ())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
