"""Seeded synthetic two-group classification data with known moments."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .moments import GroupedColumns


def random_pd_correlation(dim, seed=None, eta=1.0):
    """Random correlation matrix from the partial-correlation vine construction.

    Partial correlations are drawn from a symmetric Beta on (-1, 1) whose
    parameter depends on ``eta`` (``eta = 1`` is uniform over correlation
    matrices; larger values shrink toward the identity).
    """
    if dim < 1:
        raise ValueError("dim must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    partial = np.zeros((dim, dim))
    corr = np.eye(dim)
    b = eta + (dim - 1) / 2.0
    for k in range(dim - 1):
        b -= 0.5
        for i in range(k + 1, dim):
            partial[k, i] = 2 * rng.beta(b, b) - 1
            p = partial[k, i]
            for m in range(k - 1, -1, -1):
                p = p * math.sqrt((1 - partial[m, i] ** 2) * (1 - partial[m, k] ** 2)) \
                    + partial[m, i] * partial[m, k]
            corr[k, i] = corr[i, k] = p
    return corr


def _group_labels(rng, n, group_a_fraction, base_rate):
    group = (rng.random(n) >= group_a_fraction).astype(np.int8)
    label = (rng.random(n) < base_rate).astype(np.int8)
    return group, label


@dataclass(frozen=True)
class GuyonConfig:
    """Settings for the binormal generator.

    Class means and variances are always shared by the two groups. With
    ``per_group_correlation`` each group draws its own class correlation
    matrices from the same vine distribution; without it the groups share
    every population parameter.
    """

    n: int = 20000
    n_features: int = 50
    n_informative: int = 25
    group_a_fraction: float = 0.7
    base_rate: float = 0.25
    separation: float = 0.4
    separation_spread: float = 0.75
    eta: float = 1.0
    per_group_correlation: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.n_informative <= self.n_features:
            raise ValueError("need 0 < n_informative <= n_features")
        for name in ("group_a_fraction", "base_rate"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not self.separation > 0:
            raise ValueError("separation must be positive")
        if not 0 <= self.separation_spread < 1:
            raise ValueError("separation_spread must lie in [0, 1)")


@dataclass(frozen=True)
class GroupTruth:
    """Population class means and covariances for one group."""

    mu0: np.ndarray
    mu1: np.ndarray
    sigma0: np.ndarray
    sigma1: np.ndarray


@dataclass(frozen=True)
class GuyonData:
    data: GroupedColumns
    truth: tuple
    informative: tuple = field(default=())


def _guyon_truth(cfg, rng, gaps):
    d, k = cfg.n_features, cfg.n_informative
    mu0 = np.zeros(d)
    mu1 = np.zeros(d)
    mu0[:k] = -gaps / 2
    mu1[:k] = gaps / 2
    sigmas = []
    for _ in (0, 1):
        s = np.eye(d)
        s[:k, :k] = random_pd_correlation(k, rng, cfg.eta)
        sigmas.append(s)
    return mu0, mu1, sigmas[0], sigmas[1]


def gen_guyon(cfg=GuyonConfig()):
    """Binormal two-group data: informative block plus independent noise columns.

    Each informative column gets a class-mean gap of random sign whose
    size is uniform on ``separation * (1 -/+ separation_spread)``.

    Labels are drawn per row at the base rate, then features from the
    class-conditional normal of the row's group. Columns are permuted so
    informative features are not contiguous.
    """
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(cfg.n_features)
    spread = cfg.separation_spread
    gaps = rng.choice([-1.0, 1.0], size=cfg.n_informative) * cfg.separation * rng.uniform(
        1 - spread, 1 + spread, size=cfg.n_informative)
    shared = _guyon_truth(cfg, rng, gaps)
    params = [shared, _guyon_truth(cfg, rng, gaps) if cfg.per_group_correlation else shared]
    group, label = _group_labels(rng, cfg.n, cfg.group_a_fraction, cfg.base_rate)
    x = np.empty((cfg.n, cfg.n_features))
    truth = []
    for g in (0, 1):
        mu0, mu1, s0, s1 = params[g]
        # apply the column permutation to the population parameters
        mu0, mu1 = mu0[perm], mu1[perm]
        s0, s1 = s0[np.ix_(perm, perm)], s1[np.ix_(perm, perm)]
        truth.append(GroupTruth(mu0, mu1, s0, s1))
        for y, mu, s in ((0, mu0, s0), (1, mu1, s1)):
            rows = (group == g) & (label == y)
            x[rows] = rng.multivariate_normal(mu, s, size=int(rows.sum()), method="cholesky")
    informative = tuple(int(j) for j in np.flatnonzero(perm < cfg.n_informative))
    names = tuple(f"x{j}" for j in range(cfg.n_features))
    return GuyonData(GroupedColumns(x, group, label, names), tuple(truth), informative)


@dataclass(frozen=True)
class GammaConfig:
    """Settings for the gamma-marginal generator (shape, rate per class)."""

    neg: tuple = (1.0, math.sqrt(2.0))
    pos: tuple = (2.0, 2.0)
    group_a_fraction: float = 0.95
    base_rate: float = 0.25
    n: int = 20000
    n_informative: int = 25
    n_uninformative: int = 25
    eta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for shape, rate in (self.neg, self.pos):
            if not (shape > 0 and rate > 0):
                raise ValueError("gamma shape and rate must be positive")
        for name in ("group_a_fraction", "base_rate"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")

    @classmethod
    def dataset1(cls, **kw):
        return cls(neg=(1.0, math.sqrt(2.0)), pos=(2.0, 2.0), **kw)

    @classmethod
    def dataset2(cls, **kw):
        return cls(neg=(1.0, 0.5), pos=(2.0, math.sqrt(0.5)), **kw)


def gamma_moments(shape, rate):
    """Mean and variance of a gamma variable with the given shape and rate."""
    return shape / rate, shape / rate ** 2


def _gamma_block(rng, n, corr, shape, rate):
    z = rng.multivariate_normal(np.zeros(corr.shape[0]), corr, size=n, method="cholesky")
    # go through the survival function on the upper half so large z stays finite
    law = sps.gamma(a=shape, scale=1.0 / rate)
    return np.where(z > 0, law.isf(sps.norm.sf(z)), law.ppf(sps.norm.cdf(z)))


def gen_gamma(cfg=GammaConfig()):
    """Gamma-marginal two-group data joined by a Gaussian copula.

    Informative columns follow the class-specific gamma law; uninformative
    columns follow the negative-class law in both classes. Each group and
    class draws its own copula correlation matrix.
    """
    rng = np.random.default_rng(cfg.seed)
    p, q = cfg.n_informative, cfg.n_uninformative
    group, label = _group_labels(rng, cfg.n, cfg.group_a_fraction, cfg.base_rate)
    x = np.empty((cfg.n, p + q))
    for g in (0, 1):
        noise_corr = random_pd_correlation(q, rng, cfg.eta) if q else None
        for y, (shape, rate) in ((0, cfg.neg), (1, cfg.pos)):
            rows = (group == g) & (label == y)
            n = int(rows.sum())
            block = [_gamma_block(rng, n, random_pd_correlation(p, rng, cfg.eta), shape, rate)]
            if q:
                block.append(_gamma_block(rng, n, noise_corr, *cfg.neg))
            x[rows] = np.hstack(block)
    names = tuple(f"x{j}" for j in range(p + q))
    return GroupedColumns(x, group, label, names)
