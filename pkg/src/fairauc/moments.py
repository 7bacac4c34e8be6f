"""Class-conditional summary statistics, computed per group or pooled."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError, InsufficientSamples

GROUPS = ("a", "b")


@dataclass(frozen=True)
class ClassStats:
    """Class-conditional means and covariances (n-1 divisor) of a feature set.

    For the two-column (score, candidate) systems the score occupies
    coordinate 0 and the candidate coordinate 1; the off-diagonal entries
    are raw covariances.
    """

    mu0: np.ndarray
    mu1: np.ndarray
    sigma0: np.ndarray
    sigma1: np.ndarray
    n0: int = 2
    n1: int = 2

    def __post_init__(self):
        for name in ("mu0", "mu1"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        for name in ("sigma0", "sigma1"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        d = self.mu0.shape[0]
        if self.mu1.shape != (d,) or self.sigma0.shape != (d, d) or self.sigma1.shape != (d, d):
            raise ValueError("moment containers must share one dimension")
        if self.n0 < 2 or self.n1 < 2:
            raise ValueError("each class needs at least 2 samples")

    @property
    def dim(self):
        return self.mu0.shape[0]

    @property
    def delta_mu(self):
        """Class-1 minus class-0 mean vector."""
        return self.mu1 - self.mu0

    @property
    def sigma_sum(self):
        return self.sigma0 + self.sigma1

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        ix = np.ix_(idx, idx)
        return ClassStats(self.mu0[idx], self.mu1[idx], self.sigma0[ix], self.sigma1[ix],
                          self.n0, self.n1)

    def without_cross_covariance(self):
        """Copy with every off-diagonal covariance set to zero."""
        return ClassStats(self.mu0, self.mu1, np.diag(np.diag(self.sigma0)),
                          np.diag(np.diag(self.sigma1)), self.n0, self.n1)


@dataclass(frozen=True)
class GroupedColumns:
    """Feature matrix with a two-valued protected attribute and binary labels.

    ``group`` holds 0 for the first group name and 1 for the second.
    """

    features: np.ndarray
    group: np.ndarray
    label: np.ndarray
    feature_names: tuple = field(default=())
    group_names: tuple = GROUPS

    def __post_init__(self):
        x = np.array(self.features, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        g = np.array(self.group)
        y = np.array(self.label)
        if x.ndim != 2:
            raise DataError("features must be a 2-d array")
        n = x.shape[0]
        if g.shape != (n,) or y.shape != (n,):
            raise DataError("group and label columns must match the feature row count")
        if not np.all(np.isfinite(x)):
            raise DataError("features contain non-finite values")
        if not np.all(np.isin(y, (0, 1))):
            raise DataError("class labels must be 0 or 1")
        if not np.all(np.isin(g, (0, 1))):
            raise DataError("group codes must be 0 or 1")
        if len(self.group_names) != 2:
            raise DataError("exactly two group names required")
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise DataError("feature_names length does not match feature count")
        x.setflags(write=False)
        g = g.astype(np.int8)
        y = y.astype(np.int8)
        g.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "group", g)
        object.__setattr__(self, "label", y)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "group_names", tuple(self.group_names))

    @property
    def n_rows(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def group_code(self, g):
        """Map a group name (or code 0/1) to its integer code."""
        if isinstance(g, (int, np.integer)) and g in (0, 1):
            return int(g)
        try:
            return self.group_names.index(g)
        except ValueError:
            raise DataError(f"unknown group {g!r}; known: {self.group_names}") from None

    def group_mask(self, g):
        return self.group == self.group_code(g)

    def group_fraction(self, g):
        return float(np.mean(self.group_mask(g)))

    def with_features(self, features, feature_names=None):
        return GroupedColumns(features, self.group, self.label,
                              feature_names if feature_names is not None else (),
                              self.group_names)

    def take(self, rows):
        rows = np.asarray(rows)
        return GroupedColumns(self.features[rows], self.group[rows], self.label[rows],
                              self.feature_names, self.group_names)


def _class_moments(block, label, group_name):
    mus, sigmas, counts = [], [], []
    for y in (0, 1):
        rows = block[label == y]
        n = rows.shape[0]
        if n < 2:
            raise InsufficientSamples(group_name, y, n)
        mu = rows.mean(axis=0)
        centered = rows - mu
        mus.append(mu)
        sigmas.append(centered.T @ centered / (n - 1))
        counts.append(n)
    return ClassStats(mus[0], mus[1], sigmas[0], sigmas[1], counts[0], counts[1])


def ssr(data, feature_indices, g):
    """Class-conditional moments of the selected features within group ``g``."""
    idx = np.atleast_1d(np.asarray(feature_indices, dtype=int))
    if idx.size == 0:
        raise ValueError("feature_indices must be nonempty")
    if idx.min() < 0 or idx.max() >= data.n_features:
        raise IndexError("feature index out of range")
    mask = data.group_mask(g)
    name = data.group_names[data.group_code(g)]
    return _class_moments(data.features[mask][:, idx], data.label[mask], name)


def _pair_block(aux, scores, n):
    aux = np.asarray(aux, dtype=float)
    scores = np.asarray(scores, dtype=float)
    if aux.shape != (n,) or scores.shape != (n,):
        raise ValueError("aux and scores must be length-N columns")
    return np.column_stack([scores, aux])


def ssr2(aux, g, scores, data):
    """Two-column (score, candidate) class-conditional moments within group ``g``."""
    block = _pair_block(aux, scores, data.n_rows)
    mask = data.group_mask(g)
    name = data.group_names[data.group_code(g)]
    return _class_moments(block[mask], data.label[mask], name)


def overall_ssr(data, aux, scores):
    """Same as :func:`ssr2` but pooled over both groups."""
    block = _pair_block(aux, scores, data.n_rows)
    return _class_moments(block, data.label, "all")


def ssr2_many(candidates, g, scores, data):
    """Vectorized :func:`ssr2` over many candidate columns.

    ``candidates`` is an (N, k) matrix. Returns ``(dmu, sums)`` where
    ``dmu`` is (k, 2) and ``sums`` is (k, 2, 2): the class-1 minus class-0
    means and the class-summed covariance of each (score, candidate) pair.
    ``g=None`` pools both groups.
    """
    z = np.asarray(candidates, dtype=float)
    s = np.asarray(scores, dtype=float)
    if g is None:
        mask = np.ones(data.n_rows, dtype=bool)
        name = "all"
    else:
        mask = data.group_mask(g)
        name = data.group_names[data.group_code(g)]
    k = z.shape[1]
    dmu = np.zeros((k, 2))
    sums = np.zeros((k, 2, 2))
    for y in (0, 1):
        rows = mask & (data.label == y)
        n = int(rows.sum())
        if n < 2:
            raise InsufficientSamples(name, y, n)
        zy = z[rows]
        sy = s[rows]
        zc = zy - zy.mean(axis=0)
        sc = sy - sy.mean()
        sign = 1.0 if y == 1 else -1.0
        dmu[:, 0] += sign * sy.mean()
        dmu[:, 1] += sign * zy.mean(axis=0)
        sums[:, 0, 0] += sc @ sc / (n - 1)
        sums[:, 1, 1] += np.einsum("ij,ij->j", zc, zc) / (n - 1)
        cross = sc @ zc / (n - 1)
        sums[:, 0, 1] += cross
        sums[:, 1, 0] += cross
    return dmu, sums
