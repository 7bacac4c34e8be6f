import math

import numpy as np
import pandas as pd
import pytest

from fairauc.exceptions import DataError, UnsupportedGroups
from fairauc.io import ingest, ingest_features, preprocess


def write(tmp_path, frame, name="d.csv"):
    path = tmp_path / name
    frame.to_csv(path, index=False)
    return path


class TestPreprocess:
    def test_one_hot_drop_first(self):
        frame = pd.DataFrame({"color": ["red", "blue", "green", "red"]})
        x, names = preprocess(frame, np.zeros(4, int))
        assert x.shape == (4, 2)
        assert names == ("color_green", "color_red")
        np.testing.assert_array_equal(x[:, 1], [1, 0, 0, 1])

    def test_log1p(self):
        frame = pd.DataFrame({"count": [0.0, math.e - 1]})
        x, _ = preprocess(frame, np.zeros(2, int), log_numeric=True)
        np.testing.assert_allclose(x[:, 0], [0.0, 1.0], atol=1e-15)

    def test_log_rejects_negative(self):
        with pytest.raises(DataError):
            preprocess(pd.DataFrame({"v": [-1.0, 2.0]}), np.zeros(2, int), log_numeric=True)

    def test_group_mean_imputation(self):
        frame = pd.DataFrame({"v": [1.0, np.nan, 3.0, 10.0, 20.0]})
        group = np.array([0, 0, 0, 1, 1])
        x, _ = preprocess(frame, group)
        assert x[1, 0] == pytest.approx(2.0)
        np.testing.assert_array_equal(x[3:, 0], [10.0, 20.0])

    def test_unimputable(self):
        frame = pd.DataFrame({"v": [1.0, 2.0, np.nan, np.nan]})
        with pytest.raises(DataError, match="row 2"):
            preprocess(frame, np.array([0, 0, 1, 1]))

    def test_listed_numeric_column_as_categorical(self):
        frame = pd.DataFrame({"code": [1, 2, 3, 1]})
        _, names = preprocess(frame, np.zeros(4, int), categorical=["code"])
        assert names == ("code_2", "code_3")


class TestIngest:
    def test_basic(self, tmp_path):
        frame = pd.DataFrame({"x": [1.0, 2, 3, 4], "race": ["w", "b", "w", "b"],
                              "y": [0, 1, 1, 0]})
        data = ingest(write(tmp_path, frame), group_col="race", class_col="y")
        assert data.group_names == ("b", "w")
        np.testing.assert_array_equal(data.group, [1, 0, 1, 0])
        assert data.feature_names == ("x",)

    def test_three_groups(self, tmp_path):
        frame = pd.DataFrame({"x": [1.0, 2, 3], "group": ["a", "b", "c"], "label": [0, 1, 0]})
        with pytest.raises(UnsupportedGroups):
            ingest(write(tmp_path, frame))

    def test_non_binary_class(self, tmp_path):
        frame = pd.DataFrame({"x": [1.0, 2], "group": ["a", "b"], "label": [0, 2]})
        with pytest.raises(DataError):
            ingest(write(tmp_path, frame))

    def test_missing_column(self, tmp_path):
        frame = pd.DataFrame({"x": [1.0, 2], "grp": ["a", "b"], "label": [0, 1]})
        with pytest.raises(DataError, match="group"):
            ingest(write(tmp_path, frame))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            ingest(tmp_path / "nope.csv")

    def test_order_preserved(self, tmp_path):
        frame = pd.DataFrame({"b": [5.0, 6, 7, 8], "a": [1.0, 2, 3, 4],
                              "group": ["g", "h", "g", "h"], "label": [0, 1, 0, 1]})
        data = ingest(write(tmp_path, frame))
        assert data.feature_names == ("b", "a")
        np.testing.assert_array_equal(data.features[:, 1], [1, 2, 3, 4])

    def test_feature_file(self, tmp_path):
        frame = pd.DataFrame({"z": [1.0, np.nan, 3.0]})
        x, names = ingest_features(write(tmp_path, frame, "aux.csv"), group=np.array([0, 0, 1]))
        assert names == ("z",) and x[1, 0] == 1.0
