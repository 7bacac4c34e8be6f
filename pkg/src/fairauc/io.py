"""CSV ingestion with light preprocessing, and lossless dataset CSV round trips."""

import logging

import numpy as np
import pandas as pd

from .exceptions import DataError, UnsupportedGroups
from .moments import GroupedColumns

logger = logging.getLogger(__name__)


def _read(path):
    try:
        return pd.read_csv(path, encoding="utf-8", float_precision="round_trip")
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from None


def _encode_groups(col, name):
    values = col.dropna().unique()
    if col.isna().any():
        raise DataError(f"group column {name!r} has missing values")
    if len(values) != 2:
        raise UnsupportedGroups(f"group column {name!r} has {len(values)} distinct values; need 2")
    levels = tuple(sorted(values, key=str))
    return (col == levels[1]).to_numpy().astype(np.int8), tuple(str(v) for v in levels)


def _encode_labels(col, name):
    if col.isna().any():
        raise DataError(f"class column {name!r} has missing values")
    numeric = pd.to_numeric(col, errors="coerce")
    if numeric.isna().any() or not numeric.isin([0, 1]).all():
        raise DataError(f"class column {name!r} must contain only 0 and 1")
    return numeric.to_numpy().astype(np.int8)


def preprocess(frame, group, log_numeric=False, categorical=None):
    """Turn a raw feature frame into a float matrix.

    Numeric columns are optionally ``log1p``-transformed (negative values
    are rejected), non-numeric or listed categorical columns are one-hot
    encoded dropping the first level, and missing numeric values are filled
    with the mean of the row's group.
    """
    categorical = set(categorical or ())
    cat_cols = [c for c in frame.columns
                if c in categorical or not pd.api.types.is_numeric_dtype(frame[c])]
    num_cols = [c for c in frame.columns if c not in cat_cols]
    parts = []
    if num_cols:
        num = frame[num_cols].astype(float)
        if log_numeric:
            if (num < 0).any().any():
                bad = [c for c in num_cols if (num[c] < 0).any()]
                raise DataError(f"log transform needs nonnegative values; offending columns: {bad}")
            num = np.log1p(num)
        for g in (0, 1):
            rows = group == g
            means = num[rows].mean()
            num.loc[rows] = num[rows].fillna(means)
        if num.isna().any().any():
            col = num.columns[num.isna().any()][0]
            row = int(np.flatnonzero(num[col].isna())[0])
            raise DataError(f"cannot impute row {row}, column {col!r}: group has no observed values")
        parts.append(num)
    if cat_cols:
        cats = frame[cat_cols].astype("string")
        if cats.isna().any().any():
            col = cats.columns[cats.isna().any()][0]
            row = int(np.flatnonzero(cats[col].isna())[0])
            raise DataError(f"missing categorical value at row {row}, column {col!r}")
        parts.append(pd.get_dummies(cats, drop_first=True, dtype=float))
    if not parts:
        raise DataError("no feature columns left after removing group and class")
    out = pd.concat(parts, axis=1)
    return out.to_numpy(dtype=float), tuple(str(c) for c in out.columns)


def ingest(path, group_col="group", class_col="label", log_numeric=False, categorical=None,
           columns=None):
    """Read a CSV into :class:`~fairauc.moments.GroupedColumns`.

    ``columns`` restricts the features (default: everything except the
    group and class columns).
    """
    frame = _read(path)
    for col in (group_col, class_col):
        if col not in frame.columns:
            raise DataError(f"column {col!r} not found in {path}")
    group, names = _encode_groups(frame[group_col], group_col)
    label = _encode_labels(frame[class_col], class_col)
    feats = frame.drop(columns=[group_col, class_col])
    if columns is not None:
        missing = [c for c in columns if c not in feats.columns]
        if missing:
            raise DataError(f"columns not found: {missing}")
        feats = feats[list(columns)]
    x, feature_names = preprocess(feats, group, log_numeric, categorical)
    logger.info("ingested %s: %d rows, %d features", path, x.shape[0], x.shape[1])
    return GroupedColumns(x, group, label, feature_names, names)


def ingest_features(path, log_numeric=False, categorical=None, group=None):
    """Read a feature-only CSV (for example an auxiliary vendor file)."""
    frame = _read(path)
    if group is None:
        group = np.zeros(len(frame), dtype=np.int8)
    return preprocess(frame, np.asarray(group), log_numeric, categorical)


def write_dataset(data, path, group_col="group", class_col="label"):
    """Write features plus group and class columns; floats keep full precision."""
    frame = pd.DataFrame(data.features, columns=list(data.feature_names))
    frame[group_col] = np.asarray(data.group_names)[data.group]
    frame[class_col] = data.label.astype(int)
    frame.to_csv(path, index=False, float_format="%.17g")


def read_dataset(path, group_col="group", class_col="label", group_names=None):
    """Inverse of :func:`write_dataset` (no preprocessing)."""
    frame = _read(path)
    group_raw = frame.pop(group_col)
    label = _encode_labels(frame.pop(class_col), class_col)
    if group_names is None:
        group, names = _encode_groups(group_raw, group_col)
    else:
        names = tuple(group_names)
        group = (group_raw.astype(str) == names[1]).to_numpy().astype(np.int8)
    return GroupedColumns(frame.to_numpy(dtype=float), group, label,
                          tuple(frame.columns), names)
