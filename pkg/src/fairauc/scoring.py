"""Linear scoring rules that collapse acquired features into one score column.

Two trainers are provided: the Fisher closed form and logistic regression
fit by IRLS. Both are sklearn-compatible estimators; ``fit_fld`` /
``fit_logistic`` wrap them to build a :class:`ScoringRule` over a
:class:`~fairauc.moments.GroupedColumns` table, optionally with one model per
group.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import unique_labels
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .auc import fld_direction
from .exceptions import DataError, InsufficientSamples, PerfectSeparationWarning
from .moments import ClassStats, ssr

logger = logging.getLogger(__name__)

FLD = "fld"
LOGISTIC = "logistic"
KINDS = (FLD, LOGISTIC)


class _LinearScorer(ClassifierMixin, BaseEstimator):
    """Shared prediction surface for the two linear trainers."""

    def _validate_fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        self.classes_ = unique_labels(y)
        if not np.array_equal(self.classes_, [0, 1]):
            raise ValueError("labels must contain both 0 and 1")
        self.n_features_in_ = X.shape[1]
        return X, y.astype(int)

    def decision_function(self, X):
        """Linear predictor ``X @ coef_ + intercept_``."""
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1 - p, p])

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)


class FLDScorer(_LinearScorer):
    """Fisher discriminant scorer.

    ``coef_`` is ``(sigma0 + sigma1 + ridge I)^-1 (mu1 - mu0)`` and the
    intercept places zero at the midpoint of the projected class means.
    """

    def __init__(self, ridge=0.0):
        self.ridge = ridge

    def fit(self, X, y):
        X, y = self._validate_fit(X, y)
        parts = []
        for label in (0, 1):
            rows = X[y == label]
            if rows.shape[0] < 2:
                raise InsufficientSamples("all", label, rows.shape[0])
            parts.append((rows.mean(axis=0), np.atleast_2d(np.cov(rows, rowvar=False))))
        stats = ClassStats(parts[0][0], parts[1][0], parts[0][1], parts[1][1],
                           int((y == 0).sum()), int((y == 1).sum()))
        self._set_from_stats(stats)
        return self

    def _set_from_stats(self, stats):
        self.coef_ = fld_direction(stats, self.ridge)
        self.intercept_ = float(-self.coef_ @ (stats.mu0 + stats.mu1) / 2.0)
        self.n_features_in_ = stats.dim
        self.classes_ = np.array([0, 1])
        return self


class LogisticScorer(_LinearScorer):
    """Logistic regression by iteratively reweighted least squares.

    Features are standardized internally and the reported ``coef_`` /
    ``intercept_`` are mapped back to the original scale. A small ridge
    (``hessian_ridge``) is added to the Hessian only, so the fixed point is
    the unpenalized maximum-likelihood estimate.

    Parameters
    ----------
    max_iter : int
        Newton step cap.
    tol : float
        Convergence threshold on the largest absolute coefficient update
        (standardized scale).
    hessian_ridge : float
        Diagonal stabilizer for the Newton system.
    """

    def __init__(self, max_iter=100, tol=1e-8, hessian_ridge=1e-6):
        self.max_iter = max_iter
        self.tol = tol
        self.hessian_ridge = hessian_ridge

    def fit(self, X, y):
        X, y = self._validate_fit(X, y)
        mean = X.mean(axis=0)
        sd = X.std(axis=0)
        sd[sd == 0] = 1.0
        design = np.column_stack([np.ones(X.shape[0]), (X - mean) / sd])
        beta = np.zeros(design.shape[1])
        ridge = self.hessian_ridge * np.eye(design.shape[1])
        converged = False
        for it in range(1, self.max_iter + 1):
            p = expit(design @ beta)
            w = p * (1 - p)
            hess = design.T @ (design * w[:, None]) + ridge
            step = np.linalg.solve(hess, design.T @ (y - p))
            beta = beta + step
            if np.max(np.abs(step)) < self.tol:
                converged = True
                break
        self.n_iter_ = it
        self.converged_ = converged
        eta = design @ beta
        self.separated_ = bool(eta[y == 1].min() > eta[y == 0].max())
        if self.separated_:
            warnings.warn("classes are perfectly separated; returning last-iteration weights",
                          PerfectSeparationWarning, stacklevel=2)
        elif not converged:
            logger.debug("IRLS stopped at max_iter=%d without meeting tol", self.max_iter)
        self.coef_ = beta[1:] / sd
        self.intercept_ = float(beta[0] - self.coef_ @ mean)
        return self


@dataclass(frozen=True)
class ScoringRule:
    """Fitted per-group (or pooled) linear models over an acquired feature set.

    ``models`` maps group code to a fitted scorer when ``use_protected``;
    otherwise it holds the single pooled model under key ``None``.
    """

    kind: str
    use_protected: bool
    acquired: tuple
    models: dict

    def weights(self, g=None):
        m = self.models[g if self.use_protected else None]
        return m.coef_, m.intercept_


def _rows_for(data, g):
    if g is None:
        return np.ones(data.n_rows, dtype=bool)
    return data.group_mask(g)


def _fit(data, acquired, use_protected, make):
    idx = tuple(int(j) for j in acquired)
    if not idx:
        raise ValueError("acquired feature set must be nonempty")
    keys = (0, 1) if use_protected else (None,)
    models = {}
    for g in keys:
        rows = _rows_for(data, g)
        x = data.features[rows][:, list(idx)]
        y = data.label[rows]
        name = "all" if g is None else data.group_names[g]
        for label in (0, 1):
            n = int((y == label).sum())
            if n < 2:
                raise InsufficientSamples(name, label, n)
        models[g] = make(g, x, y, idx)
    return idx, models


def fit_fld(data, acquired, use_protected=True, ridge=0.0):
    """Fisher rule per group (or pooled) over the acquired columns."""

    def make(g, x, y, idx):
        if g is None:
            return FLDScorer(ridge).fit(x, y)
        return FLDScorer(ridge)._set_from_stats(ssr(data, list(idx), g))

    idx, models = _fit(data, acquired, use_protected, make)
    return ScoringRule(FLD, bool(use_protected), idx, models)


def fit_logistic(data, acquired, use_protected=True, max_iter=100, tol=1e-8):
    """Logistic rule per group (or pooled) over the acquired columns."""

    def make(g, x, y, idx):
        return LogisticScorer(max_iter=max_iter, tol=tol).fit(x, y)

    idx, models = _fit(data, acquired, use_protected, make)
    return ScoringRule(LOGISTIC, bool(use_protected), idx, models)


def fit_rule(kind, data, acquired, use_protected=True, ridge=0.0):
    if kind == FLD:
        return fit_fld(data, acquired, use_protected, ridge)
    if kind == LOGISTIC:
        return fit_logistic(data, acquired, use_protected)
    raise ValueError(f"unknown scoring kind {kind!r}; expected one of {KINDS}")


def score(rule, data, acquired=None):
    """Linear predictor for every row, using each row's group model if fitted per group."""
    idx = rule.acquired if acquired is None else tuple(int(j) for j in acquired)
    if idx != rule.acquired:
        raise DataError(f"rule was fitted on features {rule.acquired}, got {idx}")
    x = data.features[:, list(idx)]
    out = np.empty(data.n_rows)
    if rule.use_protected:
        for g in (0, 1):
            rows = data.group == g
            if rows.any():
                out[rows] = rule.models[g].decision_function(x[rows])
    else:
        out[:] = rule.models[None].decision_function(x)
    return out
