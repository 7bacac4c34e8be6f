"""Random population-level instances for checking the analytic guarantees.

Everything here works with exact moments (no sampling), so the checks
compare closed-form AUCs against closed-form bounds.
"""

from dataclasses import dataclass, field

import numpy as np

from .auc import bias, fld_auc, fld_direction, pair_auc
from .bounds import verify_round
from .moments import ClassStats
from .noisy import base_auc, noise_plan, target_bias_lambda, two_sided_aucs


def random_spd(rng, dim, jitter=0.2):
    """Random symmetric positive definite matrix with diagonal near ``1 + jitter``."""
    a = rng.normal(size=(dim, dim))
    return a @ a.T / dim + jitter * np.eye(dim)


def random_joint(rng, d, k, x_gap=0.5, z_gap=0.35):
    """Class moments of ``d`` owned coordinates followed by ``k`` candidates."""
    m = d + k
    mu0 = np.zeros(m)
    mu1 = np.r_[rng.normal(0, x_gap, d), rng.normal(0, z_gap, k)]
    return ClassStats(mu0, mu1, random_spd(rng, m), random_spd(rng, m))


def fisher_pair_stats(joint, d):
    """(score, candidate) moments for every candidate, with the Fisher score of the first ``d``.

    The score is ``w' X`` with ``w`` the unnormalized Fisher direction, so
    its class-mean gap equals its summed class variance.
    """
    w = fld_direction(joint.subset(range(d)))
    out = {}
    for j in range(joint.dim - d):
        c = d + j
        mus, sigmas = [], []
        for mu, sig in ((joint.mu0, joint.sigma0), (joint.mu1, joint.sigma1)):
            s_mean = w @ mu[:d]
            s_var = w @ sig[:d, :d] @ w
            cov = w @ sig[:d, c]
            mus.append([s_mean, mu[c]])
            sigmas.append([[s_var, cov], [cov, sig[c, c]]])
        out[j] = ClassStats(mus[0], mus[1], sigmas[0], sigmas[1])
    return out


@dataclass
class GuaranteeInstance:
    joints: tuple
    d: int
    disadvantaged: int
    chosen: int
    pairs: tuple = field(repr=False, default=())

    def full_gain(self):
        """Gain of the disadvantaged group when the chosen column joins all owned columns."""
        joint = self.joints[self.disadvantaged]
        idx = list(range(self.d)) + [self.d + self.chosen]
        return fld_auc(joint.subset(idx)) - fld_auc(joint.subset(range(self.d)))


def guarantee_instance(rng, d, k):
    """Two-group instance plus the column the fairness rule would pick."""
    joints = (random_joint(rng, d, k), random_joint(rng, d, k))
    base = [fld_auc(j.subset(range(d))) for j in joints]
    g = 1 if base[1] < base[0] else 0
    pairs = tuple(fisher_pair_stats(j, d) for j in joints)
    vals = np.array([pair_auc(pairs[g][ell]) for ell in range(k)])
    return GuaranteeInstance(joints, d, g, int(np.argmax(vals)), pairs)


def check_guarantee(inst):
    """Run both round guarantees on an instance."""
    g = inst.disadvantaged
    return verify_round(inst.pairs[g], inst.chosen, inst.pairs[1 - g])


def random_pair(rng, x_gap, z_gap):
    """2-coordinate class moments with a unit-scale score and a candidate."""
    mu1 = np.array([abs(rng.normal(0, x_gap)), rng.normal(0, z_gap)])
    return ClassStats(np.zeros(2), mu1, random_spd(rng, 2), random_spd(rng, 2))


@dataclass
class NoiseCheck:
    case: str
    prior_bias: float
    achieved_bias: float
    base: tuple
    after: tuple

    @property
    def bias_ok(self):
        return self.achieved_bias <= self.prior_bias + 1e-9

    @property
    def aucs_ok(self):
        return all(a >= b - 1e-9 for a, b in zip(self.after, self.base))


def noise_instance(rng):
    """Random two-group (score, candidate) pair; score and candidate strengths vary."""
    return (random_pair(rng, rng.uniform(0.2, 1.5), rng.uniform(0.1, 1.2)),
            random_pair(rng, rng.uniform(0.2, 1.5), rng.uniform(0.1, 1.2)))


def check_noise(stats_a, stats_b):
    base = (base_auc(stats_a), base_auc(stats_b))
    prior = bias(*base)
    plan = noise_plan(stats_a, stats_b, prior)
    return NoiseCheck(plan.case, prior, plan.achieved_bias, base, (plan.auc_a, plan.auc_b))


def check_pareto(stats_a, stats_b, alpha, beta):
    """Compare a two-sided plan with the one-sided plan at the same bias.

    Returns ``None`` when the two-sided bias is above the no-noise bias
    (outside the comparison's scope), else ``(two_sided, one_sided)`` AUC pairs.
    """
    two = two_sided_aucs(stats_a, stats_b, alpha, beta)
    v = bias(*two)
    top = bias(fld_auc(stats_a), fld_auc(stats_b))
    if v > top:
        return None
    plan = target_bias_lambda(stats_a, stats_b, v)
    return two, (plan.auc_a, plan.auc_b)
