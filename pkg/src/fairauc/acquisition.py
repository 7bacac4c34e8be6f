"""Greedy feature acquisition driven by group-wise AUC.

Each round the scoring rule is refit on the owned plus acquired columns,
per-group AUCs and the bias are measured, and, if the bias exceeds the
tolerance, one unacquired column is added according to a :class:`Strategy`.
Candidates are scored through the two-coordinate (score, candidate) Fisher
AUC of the relevant group, which needs only class-conditional moments.
"""

import itertools
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .auc import bias, disadvantaged, empirical_auc, fld_auc, pair_auc_many
from .bounds import bounds_many
from .exceptions import DataError, NoViableCandidate
from .moments import ClassStats, GroupedColumns, ssr, ssr2_many
from .noisy import noise_plan, noisy_feature
from .numkit import normal_cdf, quad_form
from .scoring import KINDS, LOGISTIC, fit_rule, score

logger = logging.getLogger(__name__)

FAIRAUC = "fairauc"
MAXAUC = "maxauc"
MINBIAS = "minbias"
RANDOM = "random"
WEIGHTED = "weighted"
BIAS_PENALTY = "bias_penalty"
STRATEGIES = (FAIRAUC, MAXAUC, MINBIAS, RANDOM, WEIGHTED, BIAS_PENALTY)

SINGLE = "single"
SIMULTANEOUS = "simultaneous"
SEQUENTIAL = "sequential"
BATCH_MODES = (SINGLE, SIMULTANEOUS, SEQUENTIAL)

# stream tags for per-round generators derived from the config seed
_RNG_RANDOM, _RNG_NOISE, _RNG_SPLIT = 1, 2, 3


@dataclass(frozen=True)
class Strategy:
    """Selection objective; ``weight`` is used by ``weighted`` and ``bias_penalty``."""

    kind: str = FAIRAUC
    weight: float = 1.0

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {STRATEGIES}")
        if not 0 <= self.weight <= 1:
            raise ValueError("strategy weight must lie in [0, 1]")

    @classmethod
    def parse(cls, text, weight=None):
        """Build from ``"name"`` or ``"name:weight"``."""
        name, _, w = str(text).partition(":")
        name = name.strip().lower().replace("-", "_")
        if w:
            weight = float(w)
        return cls(name, 1.0 if weight is None else float(weight))

    @property
    def label(self):
        if self.kind in (WEIGHTED, BIAS_PENALTY):
            return f"{self.kind}:{self.weight:g}"
        return self.kind


@dataclass(frozen=True)
class AcquisitionConfig:
    """Knobs shared by every round of a run."""

    scoring: str = LOGISTIC
    use_protected: bool = True
    epsilon: float = 1e-6
    zero_correlation: bool = False
    analytic_bias: bool = False
    noisy: bool = False
    batch: str = SINGLE
    holdout: float = 0.0
    ridge: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.scoring not in KINDS:
            raise ValueError(f"scoring must be one of {KINDS}")
        if self.batch not in BATCH_MODES:
            raise ValueError(f"batch must be one of {BATCH_MODES}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if not 0 <= self.holdout < 1:
            raise ValueError("holdout must lie in [0, 1)")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


@dataclass
class RoundRecord:
    """State after ``round`` acquisitions.

    ``features`` lists the columns bought to reach this state (empty for
    round 0); ``theory_bound`` is the guaranteed analytic gain of the
    selection that led here, when one applies.
    """

    round: int
    features: tuple
    feature_names: tuple
    auc_a: float
    auc_b: float
    auc_all: float
    bias: float
    disadvantaged: str
    intervention: bool
    theory_bound: Optional[float] = None
    analytic_gain: Optional[float] = None
    noise_lambda: Optional[float] = None

    @property
    def feature(self):
        return self.features[0] if self.features else None

    def to_dict(self):
        d = asdict(self)
        d["features"] = list(self.features)
        d["feature_names"] = list(self.feature_names)
        return d


@dataclass(frozen=True)
class BiasReading:
    auc_a: float
    auc_b: float
    bias: float
    disadvantaged: int


@dataclass(frozen=True)
class Selection:
    features: tuple
    objective: float
    theory_bound: Optional[float] = None
    analytic_gain: Optional[float] = None
    noise_lambda: Optional[float] = None


@dataclass
class AcquisitionState:
    """Mutable run state over an immutable column snapshot.

    ``owned`` are the columns the scorer starts with; ``candidates`` are
    the purchasable columns. ``acquired`` grows as rounds proceed.
    """

    data: GroupedColumns
    owned: tuple
    candidates: tuple
    config: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    round: int = 0
    acquired: list = field(default_factory=list)

    def __post_init__(self):
        self.owned = tuple(int(j) for j in self.owned)
        self.candidates = tuple(sorted(int(j) for j in self.candidates))
        overlap = set(self.owned) & set(self.candidates)
        if overlap:
            raise DataError(f"columns {sorted(overlap)} are both owned and candidates")
        bad = [j for j in self.owned + self.candidates if not 0 <= j < self.data.n_features]
        if bad:
            raise DataError(f"column indices out of range: {bad}")
        self.fit_rows, self.eval_rows = _split_rows(self.data, self.config)

    @property
    def columns(self):
        return self.owned + tuple(self.acquired)

    @property
    def unacquired(self):
        taken = set(self.acquired)
        return [j for j in self.candidates if j not in taken]

    def rng(self, stream):
        return np.random.default_rng([self.config.seed, self.round, stream])


def _split_rows(data, cfg):
    """Fit/evaluation row masks; both are all rows unless a holdout is set."""
    everything = np.ones(data.n_rows, dtype=bool)
    if cfg.holdout == 0:
        return everything, everything
    rng = np.random.default_rng([cfg.seed, _RNG_SPLIT])
    held = np.zeros(data.n_rows, dtype=bool)
    for g in (0, 1):
        for y in (0, 1):
            cell = np.flatnonzero((data.group == g) & (data.label == y))
            k = int(round(cfg.holdout * cell.size))
            held[rng.choice(cell, size=k, replace=False)] = True
    return ~held, held


def _fit_view(state):
    if state.fit_rows.all():
        return state.data
    return state.data.take(np.flatnonzero(state.fit_rows))


def current_scores(state):
    """Scores of every row under a rule refit on the current columns."""
    cols = state.columns
    if not cols:
        return np.zeros(state.data.n_rows)
    cfg = state.config
    rule = fit_rule(cfg.scoring, _fit_view(state), cols, cfg.use_protected, cfg.ridge)
    return score(rule, state.data, cols)


def _auc_or_half(scores, labels):
    if np.all(scores == scores[0]):
        return 0.5
    return empirical_auc(scores, labels)


def identify_bias(state, scores=None):
    """Per-group AUCs, their bias and the disadvantaged group (ties go to ``a``).

    Empirical AUCs of the scores on the evaluation rows by default; with
    ``analytic_bias`` the Fisher AUC of each group's moments is used.
    """
    data = state.data
    if state.config.analytic_bias and state.columns:
        aucs = [fld_auc(ssr(data, list(state.columns), g), state.config.ridge) for g in (0, 1)]
    else:
        if scores is None:
            scores = current_scores(state)
        aucs = []
        for g in (0, 1):
            rows = state.eval_rows & (data.group == g)
            aucs.append(_auc_or_half(scores[rows], data.label[rows]))
    return BiasReading(aucs[0], aucs[1], bias(aucs[0], aucs[1]), disadvantaged(*aucs))


def _candidate_moments(state, scores, g, cands):
    z = state.data.features[:, cands]
    view = state.data if state.fit_rows.all() else state.data.take(np.flatnonzero(state.fit_rows))
    if view is not state.data:
        z = z[state.fit_rows]
        scores = scores[state.fit_rows]
    dmu, sums = ssr2_many(z, g, scores, view)
    if state.config.zero_correlation:
        sums[:, 0, 1] = 0.0
        sums[:, 1, 0] = 0.0
    return dmu, sums


def _candidate_aucs(state, scores, g, cands):
    dmu, sums = _candidate_moments(state, scores, g, cands)
    return pair_auc_many(dmu, sums, state.config.ridge, strict=False)


def evaluate_candidates(state, scores, g):
    """Two-coordinate Fisher AUC of every unacquired column for group ``g``.

    ``g=None`` pools both groups.
    """
    cands = state.unacquired
    if not cands:
        raise NoViableCandidate("no unacquired candidates remain")
    vals = _candidate_aucs(state, scores, g, cands)
    if np.all(np.isnan(vals)):
        raise NoViableCandidate("no candidate could be evaluated")
    return dict(zip(cands, (float(v) for v in vals)))


def _bias_many(h_a, h_b):
    hi = np.maximum(h_a, h_b)
    return 1.0 - np.minimum(h_a, h_b) / hi


def objective_values(state, scores, strategy, g_star):
    """Objective of each unacquired column (higher is better) for one strategy."""
    cands = state.unacquired
    kind, w = strategy.kind, strategy.weight
    per_group = {}

    def group_auc(g):
        if g not in per_group:
            per_group[g] = _candidate_aucs(state, scores, g, cands)
        return per_group[g]

    def overall():
        if state.config.use_protected:
            phi = [state.data.group_fraction(g) for g in (0, 1)]
            return phi[0] * group_auc(0) + phi[1] * group_auc(1)
        return group_auc(None)

    if kind == FAIRAUC:
        return group_auc(g_star)
    if kind == MAXAUC:
        return overall()
    if kind == MINBIAS:
        return -_bias_many(group_auc(0), group_auc(1))
    if kind == WEIGHTED:
        return w * group_auc(g_star) + (1 - w) * overall()
    if kind == BIAS_PENALTY:
        return (1 - w) * overall() - w * _bias_many(group_auc(0), group_auc(1))
    raise ValueError(f"strategy {kind!r} has no objective")


def _argmax(values):
    """Index of the largest finite value, lowest index on ties."""
    v = np.where(np.isnan(values), -np.inf, values)
    if not np.any(np.isfinite(v)):
        raise NoViableCandidate("no candidate could be evaluated")
    return int(np.argmax(v))


def _fair_bound(state, scores, g_star, cands):
    """Largest guaranteed gain over candidates, and the score-only analytic AUC."""
    dmu, sums = _candidate_moments(state, scores, g_star, cands)
    bound, ok = bounds_many(dmu, sums)
    bound = np.where(ok & np.isfinite(bound), bound, 0.0)
    s_var = sums[0, 0, 0]
    base = normal_cdf(dmu[0, 0] / np.sqrt(s_var)) if s_var > 0 else 0.5
    return (float(bound.max()) if bound.size else 0.0), float(base)


def select_feature(state, strategy, scores=None, reading=None):
    """Pick one unacquired column under ``strategy``."""
    cands = state.unacquired
    if not cands:
        raise NoViableCandidate("no unacquired candidates remain")
    if scores is None:
        scores = current_scores(state)
    if reading is None:
        reading = identify_bias(state, scores)
    if strategy.kind == RANDOM:
        pick = int(state.rng(_RNG_RANDOM).integers(len(cands)))
        return Selection((cands[pick],), float("nan"))
    vals = objective_values(state, scores, strategy, reading.disadvantaged)
    i = _argmax(vals)
    if strategy.kind != FAIRAUC:
        return Selection((cands[i],), float(vals[i]))
    bound, base = _fair_bound(state, scores, reading.disadvantaged, cands)
    return Selection((cands[i],), float(vals[i]), bound, float(vals[i]) - base)


def _pair_system(state, scores, g, cands):
    """Class-mean gap and summed covariance of (score, all candidates) for group ``g``."""
    view = _fit_view(state)
    rows_all = state.fit_rows
    block = np.column_stack([scores[rows_all], state.data.features[rows_all][:, cands]])
    mask = view.group_mask(g)
    parts = []
    for y in (0, 1):
        rows = block[mask & (view.label == y)]
        parts.append((rows.mean(axis=0), np.cov(rows, rowvar=False)))
    dmu = parts[1][0] - parts[0][0]
    total = parts[0][1] + parts[1][1]
    if state.config.zero_correlation:
        total = np.diag(np.diag(total))
    return dmu, total


def select_pair_simultaneous(state, scores=None, reading=None):
    """Best pair of columns for the disadvantaged group by 3-coordinate Fisher AUC."""
    cands = state.unacquired
    if len(cands) < 2:
        raise NoViableCandidate("need at least two unacquired candidates")
    if scores is None:
        scores = current_scores(state)
    if reading is None:
        reading = identify_bias(state, scores)
    dmu, total = _pair_system(state, scores, reading.disadvantaged, cands)
    best, best_q = None, -np.inf
    for i, j in itertools.combinations(range(len(cands)), 2):
        idx = [0, i + 1, j + 1]
        try:
            q = quad_form(total[np.ix_(idx, idx)], dmu[idx], state.config.ridge)
        except ArithmeticError:
            continue
        if q > best_q:
            best, best_q = (cands[i], cands[j]), q
    if best is None:
        raise NoViableCandidate("no candidate pair could be evaluated")
    return Selection(best, float(best_q))


def select_pair_sequential(state, scores=None, reading=None):
    """Best single column, then the remaining column least correlated with it."""
    cands = state.unacquired
    if len(cands) < 2:
        raise NoViableCandidate("need at least two unacquired candidates")
    first = select_feature(state, Strategy(FAIRAUC), scores, reading)
    f = first.features[0]
    rest = [j for j in cands if j != f]
    x = state.data.features[state.fit_rows]
    corr = [abs(np.corrcoef(x[:, f], x[:, j])[0, 1]) for j in rest]
    corr = np.nan_to_num(np.asarray(corr), nan=np.inf)
    second = rest[int(np.argmin(corr))]
    return Selection((f, second), first.objective)


def _apply_noise(state, scores, feature):
    """Replace ``feature`` by its noisy blend; returns the mixing weight."""
    stats = []
    for g in (0, 1):
        dmu, sums = _candidate_moments(state, scores, g, [feature])
        # the noise model needs per-class moments; split the class sum evenly
        half = sums[0] / 2
        stats.append(ClassStats(np.zeros(2), dmu[0], half, half))
    plan = noise_plan(stats[0], stats[1], ridge=state.config.ridge)
    if plan.lam < 1:
        x = np.array(state.data.features)
        x[:, feature] = noisy_feature(x[:, feature], state.data.group == plan.advantaged,
                                      plan.lam, state.rng(_RNG_NOISE))
        state.data = state.data.with_features(x, state.data.feature_names)
    return plan.lam


def _select(state, strategy, scores, reading):
    mode = state.config.batch
    if mode == SIMULTANEOUS:
        return select_pair_simultaneous(state, scores, reading)
    if mode == SEQUENTIAL:
        return select_pair_sequential(state, scores, reading)
    return select_feature(state, strategy, scores, reading)


def run(state, strategy, rounds=10, on_round=None):
    """Run up to ``rounds`` acquisition rounds; returns one record per state reached.

    Stops early once the bias is within tolerance or no candidates remain.
    ``on_round(state, scores, record)`` is called after each record is made.
    """
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    records = []
    pending = Selection((), float("nan"))
    data = state.data
    while True:
        scores = current_scores(state)
        reading = identify_bias(state, scores)
        rows = state.eval_rows
        auc_all = _auc_or_half(scores[rows], state.data.label[rows])
        intervene = reading.bias > state.config.epsilon
        names = tuple(data.feature_names[j] for j in pending.features)
        records.append(RoundRecord(
            state.round, pending.features, names, reading.auc_a, reading.auc_b, auc_all,
            reading.bias, data.group_names[reading.disadvantaged], intervene,
            pending.theory_bound, pending.analytic_gain, pending.noise_lambda))
        if on_round is not None:
            on_round(state, scores, records[-1])
        logger.info("round %d: features=%s auc_a=%.4f auc_b=%.4f bias=%.4f",
                    state.round, names, reading.auc_a, reading.auc_b, reading.bias)
        if not intervene or state.round >= rounds or not state.unacquired:
            break
        if state.config.batch != SINGLE and len(state.unacquired) < 2:
            break
        pending = _select(state, strategy, scores, reading)
        if state.config.noisy:
            lam = _apply_noise(state, scores, pending.features[0])
            pending = replace(pending, noise_lambda=lam)
        state.acquired.extend(pending.features)
        state.round += 1
    return records


class FairFeatureAcquirer(SelectorMixin, BaseEstimator):
    """Feature selector that runs the acquisition loop on ``fit``.

    ``X`` holds every column, ``owned`` lists the columns available from
    the start and every other column is a purchase candidate. ``groups``
    must be passed to ``fit`` as a two-valued array.

    After fitting, ``records_`` holds the per-round records and
    ``acquired_`` the purchased columns in order.
    """

    def __init__(self, strategy="fairauc", weight=1.0, n_rounds=10, owned=(0,),
                 scoring=LOGISTIC, use_protected=True, epsilon=1e-6,
                 zero_correlation=False, noisy=False, batch=SINGLE, random_state=0):
        self.strategy = strategy
        self.weight = weight
        self.n_rounds = n_rounds
        self.owned = owned
        self.scoring = scoring
        self.use_protected = use_protected
        self.epsilon = epsilon
        self.zero_correlation = zero_correlation
        self.noisy = noisy
        self.batch = batch
        self.random_state = random_state

    def fit(self, X, y, groups=None):
        X, y = check_X_y(X, y, dtype=float)
        if groups is None:
            raise DataError("groups is required")
        groups = np.asarray(groups)
        levels = np.unique(groups)
        if levels.size != 2:
            raise DataError(f"groups must have exactly two values, found {levels.size}")
        codes = (groups == levels[1]).astype(int)
        data = GroupedColumns(X, codes, y, group_names=tuple(str(v) for v in levels))
        owned = tuple(int(j) for j in self.owned)
        cands = [j for j in range(X.shape[1]) if j not in owned]
        cfg = AcquisitionConfig(
            scoring=self.scoring, use_protected=self.use_protected, epsilon=self.epsilon,
            zero_correlation=self.zero_correlation, noisy=self.noisy, batch=self.batch,
            seed=self.random_state)
        state = AcquisitionState(data, owned, cands, cfg)
        self.records_ = run(state, Strategy(self.strategy, self.weight), self.n_rounds)
        self.acquired_ = tuple(state.acquired)
        self.n_features_in_ = X.shape[1]
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "acquired_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[list(self.owned) + list(self.acquired_)] = True
        return mask
