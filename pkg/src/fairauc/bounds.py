"""Per-round AUC-improvement guarantees for the fairness-driven selection rule.

For a disadvantaged group with current AUC ``1 - gamma`` and a candidate
feature ``Z``, the guaranteed analytic gain from adding ``Z`` is at least
``gamma**1.5 * (beta * (1 - delta))**2 / 4`` where ``beta`` is the
standardized class-mean gap of ``Z`` and ``delta`` its normalized
class-conditional covariance with the score. The guarantee relies on
``(beta * (1 - delta))**2 <= 1``; candidates outside that regime are
reported separately instead of being counted as violations.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .auc import normal_cdf, pair_auc
from .exceptions import FairAUCError

FLOAT_SLACK = 1e-12


class BoundViolation(FairAUCError):
    """An analytic improvement fell below its guaranteed lower bound."""

    def __init__(self, candidate, margin, which="disadvantaged"):
        self.candidate = candidate
        self.margin = margin
        self.which = which
        super().__init__(f"{which} bound violated for candidate {candidate}: margin {margin:.3e}")


@dataclass(frozen=True)
class BoundInputs:
    gamma: float
    beta: float
    delta: float
    feature: int = -1

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must lie in [0, 1]")

    @property
    def in_premise(self):
        """Whether the squared effective separation is at most 1."""
        return (self.beta * (1 - self.delta)) ** 2 <= 1.0


def beta_of(stats2):
    """Standardized class-mean gap of the candidate (coordinate 1).

    The absolute gap is used; flipping the sign of a candidate does not
    change its usefulness.
    """
    var_sum = float(stats2.sigma_sum[1, 1])
    if not var_sum > 0:
        raise ValueError("candidate has zero class-conditional variance")
    return abs(float(stats2.delta_mu[1])) / math.sqrt(var_sum)


def delta_of(stats2):
    """Normalized score/candidate covariance, clamped to 1.

    The score is first rescaled so that its mean gap equals its summed
    class variance (the Fisher normalization the guarantee assumes). A
    score that already has this property is left unchanged.
    """
    dv = abs(float(stats2.delta_mu[1]))
    if dv == 0:
        raise ValueError("delta is undefined when the candidate mean gap is zero")
    s_var = float(stats2.sigma_sum[0, 0])
    k = float(stats2.delta_mu[0]) / s_var if s_var > 0 else 0.0
    cov = abs(k * float(stats2.sigma_sum[0, 1]))
    return min(cov / dv, 1.0)


def improvement_bound(b):
    """``gamma**1.5 * beta**2 * (1 - delta)**2 / 4``."""
    return 0.25 * b.gamma ** 1.5 * b.beta ** 2 * (1 - b.delta) ** 2


def score_auc(stats2):
    """Analytic AUC of the score alone (coordinate 0)."""
    s_var = float(stats2.sigma_sum[0, 0])
    if not s_var > 0:
        return 0.5
    return normal_cdf(float(stats2.delta_mu[0]) / math.sqrt(s_var))


def bound_inputs(stats2, feature=-1):
    """Collect ``gamma``, ``beta`` and ``delta`` for one candidate."""
    gamma = min(max(1.0 - score_auc(stats2), 0.0), 1.0)
    beta = beta_of(stats2)
    delta = delta_of(stats2) if beta > 0 else 0.0
    return BoundInputs(gamma, beta, delta, feature)


@dataclass
class CandidateMargin:
    feature: int
    bound: float
    improvement: float
    in_premise: bool

    @property
    def margin(self):
        return self.improvement - self.bound


@dataclass
class RoundVerification:
    """Outcome of checking one selection round against both guarantees."""

    chosen: int
    gain_disadvantaged: float
    best_bound: float
    gain_advantaged: float = float("nan")
    advantaged_bound: float = float("nan")
    candidates: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    out_of_premise: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    @property
    def margin(self):
        return self.gain_disadvantaged - self.best_bound

    def raise_if_failed(self):
        if self.violations:
            which, cand, margin = self.violations[0]
            raise BoundViolation(cand, margin, which)


def verify_round(disadv_stats, chosen, adv_stats=None, slack=FLOAT_SLACK):
    """Check the guarantees for one fairness-driven selection round.

    Parameters
    ----------
    disadv_stats : dict
        Candidate feature to 2-dim (score, candidate) statistics for the
        disadvantaged group.
    chosen : int
        Candidate picked by the round.
    adv_stats : dict, optional
        Same for the advantaged group; only the chosen entry is used.
    slack : float
        Floating-point allowance on each comparison.
    """
    base = score_auc(next(iter(disadv_stats.values())))
    gain = pair_auc(disadv_stats[chosen]) - base
    report = RoundVerification(chosen, gain, 0.0)
    for feat, st in disadv_stats.items():
        b = bound_inputs(st, feat)
        own_gain = pair_auc(st) - base
        cm = CandidateMargin(feat, improvement_bound(b), own_gain, b.in_premise)
        report.candidates.append(cm)
        if not cm.in_premise:
            report.out_of_premise.append(feat)
            continue
        if cm.margin < -slack:
            report.violations.append(("candidate", feat, cm.margin))
        report.best_bound = max(report.best_bound, cm.bound)
    if gain - report.best_bound < -slack:
        report.violations.append(("disadvantaged", chosen, gain - report.best_bound))
    if adv_stats is not None:
        st = adv_stats[chosen]
        b = bound_inputs(st, chosen)
        report.gain_advantaged = pair_auc(st) - score_auc(st)
        report.advantaged_bound = improvement_bound(b)
        if b.in_premise and report.gain_advantaged - report.advantaged_bound < -slack:
            report.violations.append(("advantaged", chosen,
                                      report.gain_advantaged - report.advantaged_bound))
        elif not b.in_premise:
            report.out_of_premise.append(chosen)
    return report


@dataclass
class LemmaReport:
    n_inverting: int
    n_change: int
    min_margin_inverting: float
    min_margin_change: float
    violations: list

    @property
    def ok(self):
        return not self.violations


def change_lower_bound(gamma, delta0):
    """Right-hand side of the lower bound on ``Phi(sqrt(a + d)) - Phi(sqrt(a))``."""
    return (2 / math.sqrt(math.pi)) * gamma ** 1.5 * delta0 / (
        math.sqrt(2 / math.e + delta0) * (2 + delta0))


def lemma_checks(n_gamma=100, n_alpha=100, n_delta0=12, n_delta=6):
    """Grid-evaluate the two analytic inequalities behind the guarantee.

    * inverting: ``Phi(sqrt(a)) < 1 - g`` implies ``a < -2 ln(2 g)``;
    * change: ``Phi(sqrt(a + d)) - Phi(sqrt(a))`` is at least
      :func:`change_lower_bound` for ``a`` in ``(0, -2 ln 2g)`` and ``d >= d0``.

    Returns a :class:`LemmaReport` with the minimum slack of each and any
    offending tuples.
    """
    violations = []
    gammas = np.linspace(1e-3, 0.5, n_gamma)
    alphas = np.linspace(0.0, 30.0, n_alpha)
    min_inv = math.inf
    n_inv = 0
    for g in gammas:
        cap = -2 * math.log(2 * g)
        for a in alphas:
            n_inv += 1
            if normal_cdf(math.sqrt(a)) < 1 - g:
                slack = cap - a
                min_inv = min(min_inv, slack)
                if not slack > 0:
                    violations.append(("inverting", float(g), float(a)))
    min_chg = math.inf
    n_chg = 0
    d0s = np.geomspace(1e-3, 50, n_delta0)
    steps = np.geomspace(1, 20, n_delta)
    for g in gammas[gammas < 0.5]:
        cap = -2 * math.log(2 * g)
        a = np.linspace(0, cap, n_alpha + 2)[1:-1][:, None, None]
        d0 = d0s[None, :, None]
        d = d0 * steps[None, None, :]
        rhs = (2 / math.sqrt(math.pi)) * g ** 1.5 * d0 / (np.sqrt(2 / math.e + d0) * (2 + d0))
        lhs = normal_cdf(np.sqrt(a + d)) - normal_cdf(np.sqrt(a))
        slack = np.broadcast_to(lhs - rhs, (a.shape[0], d0s.size, steps.size))
        n_chg += slack.size
        min_chg = min(min_chg, float(slack.min()))
        for i, j, k in np.argwhere(slack < -FLOAT_SLACK):
            violations.append(("change", float(g), float(a[i, 0, 0]), float(d0s[j]),
                               float(d[0, j, k])))
    return LemmaReport(n_inv, n_chg, min_inv, min_chg, violations)


def bounds_many(dmu, sums):
    """Vectorized bound for stacked (score, candidate) systems.

    Returns ``(bound, in_premise)`` arrays; candidates with zero variance
    get bound 0.
    """
    s_var = sums[:, 0, 0]
    z_var = sums[:, 1, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        auc = normal_cdf(np.where(s_var > 0, dmu[:, 0] / np.sqrt(np.where(s_var > 0, s_var, 1)), 0.0))
        gamma = np.clip(1 - auc, 0.0, 1.0)
        dv = np.abs(dmu[:, 1])
        beta = np.where(z_var > 0, dv / np.sqrt(np.where(z_var > 0, z_var, 1)), 0.0)
        k = np.where(s_var > 0, dmu[:, 0] / np.where(s_var > 0, s_var, 1), 0.0)
        delta = np.where(dv > 0, np.minimum(np.abs(k * sums[:, 0, 1]) / np.where(dv > 0, dv, 1), 1.0), 0.0)
    eff = (beta * (1 - delta)) ** 2
    return 0.25 * gamma ** 1.5 * eff, eff <= 1.0
