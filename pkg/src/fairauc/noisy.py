"""Noisy acquisition: blend a new feature with Gaussian noise for one group.

The advantaged group (higher analytic AUC once the feature is added) sees
``lam * z + (1 - lam) * N(0, 1)``; the other group sees ``z`` unchanged.
``lam = 1`` is plain acquisition, ``lam = 0`` means the advantaged group
gains nothing. The analytic AUC of the advantaged group is nondecreasing
in ``lam``, so target biases can be hit by bisection.

Statistics passed to this module may have any dimension; the candidate
feature is always the last coordinate.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .auc import bias, fld_auc
from .exceptions import NumericError, RangeError
from .moments import ClassStats

logger = logging.getLogger(__name__)

MAX_BISECTIONS = 200
LAMBDA_FLOOR = 1e-10


@dataclass(frozen=True)
class NoisePlan:
    """Chosen mixing weight and the analytic AUCs it produces.

    ``advantaged`` is 0 when the first statistics passed in belong to the
    advantaged group, 1 otherwise; ``auc_a``/``auc_b`` follow the same
    first/second order.
    """

    lam: float
    advantaged: int
    achieved_bias: float
    auc_a: float
    auc_b: float
    case: str

    def __post_init__(self):
        if not 0 <= self.lam <= 1:
            raise ValueError("lam must lie in [0, 1]")


def noisy_feature(z, advantaged_mask, lam, rng):
    """Blend ``z`` with standard-normal noise on the advantaged rows."""
    if not 0 <= lam <= 1:
        raise ValueError("lam must lie in [0, 1]")
    out = np.array(z, dtype=float, copy=True)
    mask = np.asarray(advantaged_mask, dtype=bool)
    noise = rng.standard_normal(int(mask.sum()))
    out[mask] = lam * out[mask] + (1 - lam) * noise
    return out


def noisy_stats(stats, lam):
    """Moments of the system after replacing the last coordinate by its noisy blend.

    Per class, the noisy coordinate has mean ``lam * v``, variance
    ``lam**2 * var + (1 - lam)**2`` and covariance ``lam * cov`` with the
    other coordinates.
    """
    scale = np.ones(stats.dim)
    scale[-1] = lam
    outer = np.outer(scale, scale)
    s0 = stats.sigma0 * outer
    s1 = stats.sigma1 * outer
    s0[-1, -1] += (1 - lam) ** 2
    s1[-1, -1] += (1 - lam) ** 2
    return ClassStats(stats.mu0 * scale, stats.mu1 * scale, s0, s1, stats.n0, stats.n1)


def auc_with_noise(stats, lam, ridge=0.0):
    """Analytic AUC after the last coordinate is replaced by its noisy blend."""
    if not 0 <= lam <= 1:
        raise ValueError("lam must lie in [0, 1]")
    if lam == 0:
        return base_auc(stats, ridge)
    if lam == 1:
        return fld_auc(stats, ridge)
    return fld_auc(noisy_stats(stats, lam), ridge)


def base_auc(stats, ridge=0.0):
    """Analytic AUC without the last coordinate (0.5 if nothing is left)."""
    if stats.dim == 1:
        return 0.5
    return fld_auc(stats.subset(range(stats.dim - 1)), ridge)


def two_sided_aucs(stats_a, stats_b, alpha, beta, ridge=0.0):
    """Group AUCs when both groups get their own noise weight (``alpha``, ``beta``)."""
    return auc_with_noise(stats_a, alpha, ridge), auc_with_noise(stats_b, beta, ridge)


def _bisect(fn, lo, hi):
    """Root of an increasing ``fn`` on ``[lo, hi]`` with ``fn(lo) <= 0 <= fn(hi)``."""
    f_lo, f_hi = fn(lo), fn(hi)
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= LAMBDA_FLOOR:
            break
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid <= 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    else:
        raise NumericError("bisection on lam did not converge")
    return lo if abs(f_lo) <= abs(f_hi) else hi


class _Problem:
    """Shared setup: which group is advantaged and the fixed endpoint AUCs."""

    def __init__(self, stats_a, stats_b, ridge):
        self.stats = (stats_a, stats_b)
        self.ridge = ridge
        full = (fld_auc(stats_a, ridge), fld_auc(stats_b, ridge))
        self.full = full
        self.adv = 0 if full[0] >= full[1] else 1
        self.dis = 1 - self.adv
        self.target = full[self.dis]
        self.base_adv = base_auc(self.stats[self.adv], ridge)

    def adv_auc(self, lam):
        return auc_with_noise(self.stats[self.adv], lam, self.ridge)

    def plan(self, lam, case):
        aucs = [0.0, 0.0]
        aucs[self.adv] = self.adv_auc(lam)
        aucs[self.dis] = self.target
        return NoisePlan(float(lam), self.adv, bias(*aucs), aucs[0], aucs[1], case)

    def lower_lambda(self):
        """Smallest-bias mixing weight and the case label."""
        if self.full[0] == self.full[1]:
            return 1.0, "equal"
        if self.target >= self.base_adv:
            lam = _bisect(lambda x: self.adv_auc(x) - self.target, 0.0, 1.0)
            return lam, "A"
        return 0.0, "B"


def noise_plan(stats_a, stats_b, prior_bias=None, ridge=0.0):
    """Mixing weight that keeps the bias from growing.

    If the disadvantaged group's AUC with the new feature reaches the
    advantaged group's AUC without it, the weight is bisected so both
    groups end level. Otherwise the advantaged group gets pure noise
    (``lam = 0``).
    """
    prob = _Problem(stats_a, stats_b, ridge)
    lam, case = prob.lower_lambda()
    plan = prob.plan(lam, case)
    if prior_bias is None:
        prior_bias = bias(base_auc(stats_a, ridge), base_auc(stats_b, ridge))
    if plan.achieved_bias > prior_bias + 1e-9:
        logger.warning("noisy plan bias %.6g exceeds prior %.6g", plan.achieved_bias, prior_bias)
    return plan


def solve_lambda(stats_adv, stats_disadv, prior_bias=None, ridge=0.0):
    """:func:`noise_plan` with the advantaged group's statistics passed first."""
    return noise_plan(stats_adv, stats_disadv, prior_bias, ridge)


def achievable_bias_range(stats_a, stats_b, ridge=0.0):
    """Bias interval reachable by varying the advantaged group's weight."""
    prob = _Problem(stats_a, stats_b, ridge)
    lam0, case = prob.lower_lambda()
    return prob.plan(lam0, case).achieved_bias, prob.plan(1.0, case).achieved_bias


def target_bias_lambda(stats_a, stats_b, target, ridge=0.0, tol=1e-8):
    """Mixing weight whose resulting bias equals ``target``.

    Raises
    ------
    RangeError
        If ``target`` lies outside :func:`achievable_bias_range`.
    """
    prob = _Problem(stats_a, stats_b, ridge)
    lam0, case = prob.lower_lambda()
    low = prob.plan(lam0, case).achieved_bias
    high = prob.plan(1.0, case).achieved_bias
    if not (low - tol <= target <= high + tol):
        raise RangeError(target, low, high)
    if target >= high:
        return prob.plan(1.0, case)
    if target <= low:
        return prob.plan(lam0, case)
    lam = _bisect(lambda x: prob.plan(x, case).achieved_bias - target, lam0, 1.0)
    plan = prob.plan(lam, case)
    if abs(plan.achieved_bias - target) > tol:
        raise NumericError(f"bisection reached bias {plan.achieved_bias:.3e}, wanted {target:.3e}")
    return plan


def remark_scaling(lam, alpha):
    """Shrink factor on the guaranteed gain when the candidate is blended at ``lam``.

    ``alpha`` is the sum of the candidate's class-wise variances.
    """
    if lam == 0:
        return 0.0
    return 1.0 / (1.0 + 2 * (1 - lam) ** 2 / (alpha * lam ** 2))

