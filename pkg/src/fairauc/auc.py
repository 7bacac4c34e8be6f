"""AUC formulas: binormal closed form, Mann-Whitney estimate, FLD and bias."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .exceptions import SingularMatrix
from .numkit import normal_cdf, quad_form, spd_solve


@dataclass(frozen=True)
class Binormal1D:
    """Class-conditional normal means and variances of a single score."""

    mu0: float
    mu1: float
    var0: float
    var1: float

    def __post_init__(self):
        if not (self.var0 > 0 and self.var1 > 0):
            raise ValueError("binormal variances must be positive")

    @property
    def delta_mu(self):
        return self.mu1 - self.mu0


def binormal_auc(p):
    """AUC of a score whose classes are N(mu0, var0) and N(mu1, var1).

    Values below 0.5 are returned as-is.
    """
    return normal_cdf(p.delta_mu / math.sqrt(p.var0 + p.var1))


def _check_labels(labels, n):
    y = np.asarray(labels)
    if y.shape != (n,):
        raise ValueError("scores and labels must have the same length")
    pos = y == 1
    n1 = int(pos.sum())
    n0 = n - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("empirical AUC needs both classes present")
    if n0 + n1 != int(np.isin(y, (0, 1)).sum()):
        raise ValueError("labels must be 0 or 1")
    return pos, n0, n1


def empirical_auc(scores, labels):
    """Mann-Whitney AUC with half credit for ties.

    Uses average ranks, so the result depends on the scores only through
    their ordering.
    """
    s = np.asarray(scores, dtype=float)
    pos, n0, n1 = _check_labels(labels, s.shape[0])
    ranks = rankdata(s)
    r1 = ranks[pos].sum()
    return float((r1 - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def bias(auc_a, auc_b):
    """Relative gap ``1 - min/max`` between two group AUCs."""
    hi = max(auc_a, auc_b)
    if not hi > 0:
        raise ValueError("bias undefined when both AUCs are zero")
    return 1.0 - min(auc_a, auc_b) / hi


def disadvantaged(auc_a, auc_b):
    """Index (0 for a, 1 for b) of the group with the lower AUC; ties go to a."""
    return 1 if auc_b < auc_a else 0


def fld_direction(stats, ridge=0.0):
    """Fisher direction ``(sigma0 + sigma1 + ridge I)^-1 (mu1 - mu0)``."""
    dmu = stats.delta_mu
    if not np.any(dmu):
        return np.zeros_like(dmu)
    return spd_solve(stats.sigma_sum, dmu, ridge)


def fld_auc(stats, ridge=0.0):
    """Best linear-projection AUC under the binormal model."""
    q = quad_form(stats.sigma_sum, stats.delta_mu, ridge)
    return normal_cdf(math.sqrt(max(q, 0.0)))


def pair_auc(stats2, ridge=0.0):
    """:func:`fld_auc` for a two-coordinate (score, candidate) system.

    Solved in closed form; falls back to the ridged Cholesky path when the
    2x2 determinant is not clearly positive.
    """
    if stats2.dim != 2:
        raise ValueError("pair_auc expects 2-dim statistics")
    return float(pair_auc_many(stats2.delta_mu[None, :], stats2.sigma_sum[None], ridge)[0])


def pair_quad_many(dmu, sums, ridge=0.0, strict=True):
    """Batch ``dmu' sums^-1 dmu`` for (k, 2) means and (k, 2, 2) sums.

    Near-singular systems go through the ridged Cholesky path; if that
    still fails the entry is NaN when ``strict`` is false.
    """
    a = sums[:, 0, 0] + ridge
    c = sums[:, 1, 1] + ridge
    b = sums[:, 0, 1]
    det = a * c - b * b
    u, v = dmu[:, 0], dmu[:, 1]
    out = np.empty(dmu.shape[0])
    scale = np.maximum(np.abs(a * c), np.finfo(float).tiny)
    ok = (a > 0) & (c > 0) & (det > 1e-12 * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[ok] = (c[ok] * u[ok] ** 2 - 2 * b[ok] * u[ok] * v[ok] + a[ok] * v[ok] ** 2) / det[ok]
    for i in np.flatnonzero(~ok):
        try:
            out[i] = quad_form(sums[i], dmu[i], ridge)
        except SingularMatrix:
            if strict:
                raise
            out[i] = np.nan
    return np.maximum(out, 0.0)


def pair_auc_many(dmu, sums, ridge=0.0, strict=True):
    """Vectorized :func:`pair_auc` over stacked candidate systems."""
    q = pair_quad_many(dmu, sums, ridge, strict)
    out = np.full(q.shape, np.nan)
    good = np.isfinite(q)
    out[good] = normal_cdf(np.sqrt(q[good]))
    return out


def unconditional_variance(pi, p):
    """Variance of the score mixed over both classes with positive rate ``pi``."""
    if not 0 < pi < 1:
        raise ValueError("pi must lie strictly between 0 and 1")
    return pi * (1 - pi) * p.delta_mu ** 2 + pi * p.var1 + (1 - pi) * p.var0


def bootstrap_auc_ci(scores, labels, n_resamples=1000, level=0.95, seed=0):
    """Percentile CI for the empirical AUC from a class-stratified bootstrap.

    Returns ``(low, high)``.
    """
    s = np.asarray(scores, dtype=float)
    pos, n0, n1 = _check_labels(labels, s.shape[0])
    rng = np.random.default_rng(seed)
    s1, s0 = s[pos], s[~pos]
    stats = np.empty(n_resamples)
    y = np.r_[np.ones(n1, dtype=np.int8), np.zeros(n0, dtype=np.int8)]
    for k in range(n_resamples):
        draw = np.r_[s1[rng.integers(0, n1, n1)], s0[rng.integers(0, n0, n0)]]
        stats[k] = empirical_auc(draw, y)
    tail = (1 - level) / 2
    lo, hi = np.quantile(stats, [tail, 1 - tail])
    return float(lo), float(hi)
