"""Experiment orchestration: config, report assembly and serialization."""

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from . import acquisition as acq
from .exceptions import DataError
from .moments import GroupedColumns

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("Round", "Feature", "AUC_a", "AUC_b", "AUC_All", "Bias", "Disadv")
DEFAULT_SWEEP = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one acquisition run."""

    strategy: str = acq.FAIRAUC
    weight: float = 1.0
    rounds: int = 10
    epsilon: float = 1e-6
    scoring: str = acq.LOGISTIC
    use_protected: bool = True
    holdout: float = 0.0
    zero_correlation: bool = False
    noisy: bool = False
    batch: str = acq.SINGLE
    analytic_bias: bool = False
    owned: Optional[tuple] = None
    candidates: Optional[tuple] = None
    n_owned: int = 1
    bootstrap: int = 1000
    sweep_weights: tuple = ()
    seed: int = 0
    data: str = ""

    def __post_init__(self):
        if self.rounds < 0:
            raise ValueError("rounds must be nonnegative")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if not 0 <= self.holdout < 1:
            raise ValueError("holdout must lie in [0, 1)")
        if self.bootstrap < 0:
            raise ValueError("bootstrap must be nonnegative")
        acq.Strategy(self.strategy, self.weight)

    def acquisition_config(self):
        return acq.AcquisitionConfig(
            scoring=self.scoring, use_protected=self.use_protected, epsilon=self.epsilon,
            zero_correlation=self.zero_correlation, analytic_bias=self.analytic_bias,
            noisy=self.noisy, batch=self.batch, holdout=self.holdout, seed=self.seed)

    def to_dict(self):
        d = asdict(self)
        for key in ("owned", "candidates", "sweep_weights"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d


@dataclass
class Report:
    config: dict
    owned: list
    records: list
    intervals: list = field(default_factory=list)
    pareto: list = field(default_factory=list)
    verification: list = field(default_factory=list)

    def to_dict(self):
        return {
            "config": self.config,
            "owned": self.owned,
            "records": [r.to_dict() for r in self.records],
            "intervals": self.intervals,
            "pareto": self.pareto,
            "verification": self.verification,
        }


def _resolve(names, data, what):
    out = []
    for item in names:
        if isinstance(item, (int, np.integer)):
            j = int(item)
        elif str(item).lstrip("-").isdigit() and str(item) not in data.feature_names:
            j = int(item)
        else:
            try:
                j = data.feature_names.index(str(item))
            except ValueError:
                raise DataError(f"unknown {what} column {item!r}") from None
        if not 0 <= j < data.n_features:
            raise DataError(f"{what} column index {j} out of range")
        out.append(j)
    return tuple(out)


def partition_columns(data, cfg):
    """Owned and candidate column indices for a run.

    Without an explicit ``owned`` list, ``n_owned`` columns are drawn at
    random from the config seed.
    """
    if cfg.owned is not None:
        owned = _resolve(cfg.owned, data, "owned")
    else:
        rng = np.random.default_rng([cfg.seed, 0])
        owned = tuple(int(j) for j in rng.choice(data.n_features, size=cfg.n_owned, replace=False))
    if cfg.candidates is not None:
        cands = _resolve(cfg.candidates, data, "candidate")
    else:
        cands = tuple(j for j in range(data.n_features) if j not in owned)
    return owned, cands


class _Recorder:
    """Keeps the score column of every round so intervals can be computed afterwards."""

    def __init__(self):
        self.scores = []

    def __call__(self, state, scores, record):
        self.scores.append((scores.copy(), state.eval_rows.copy()))


def _stratified_auc_ci(scores, labels, n_resamples, rng, level=0.95):
    """Class-stratified bootstrap percentile interval, using shared ranks.

    Resampling only changes multiplicities, so each replicate is scored
    from per-value counts in O(n) instead of re-sorting.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    if np.all(y == y[0]):
        return [math.nan, math.nan]
    codes = rankdata(s, method="dense").astype(int) - 1
    n_vals = int(codes.max()) + 1
    pos_codes, neg_codes = codes[y == 1], codes[y == 0]
    n1, n0 = pos_codes.size, neg_codes.size
    stats = np.empty(n_resamples)
    for b in range(n_resamples):
        cp = np.bincount(pos_codes[rng.integers(0, n1, n1)], minlength=n_vals)
        cn = np.bincount(neg_codes[rng.integers(0, n0, n0)], minlength=n_vals)
        below = np.cumsum(cn) - cn
        stats[b] = (cp @ (below + 0.5 * cn)) / (n1 * n0)
    tail = (1 - level) / 2
    lo, hi = np.quantile(stats, [tail, 1 - tail])
    return [float(lo), float(hi)]


def _intervals(data, recorder, n_resamples, seed):
    out = []
    for t, (scores, rows) in enumerate(recorder.scores):
        rng = np.random.default_rng([seed, t, 7])
        entry = {"round": t}
        for key, mask in (("auc_a", rows & (data.group == 0)),
                          ("auc_b", rows & (data.group == 1)),
                          ("auc_all", rows)):
            entry[key] = _stratified_auc_ci(scores[mask], data.label[mask], n_resamples, rng)
        out.append(entry)
    return out


def _trajectory(data, owned, cands, cfg, strategy):
    state = acq.AcquisitionState(data, owned, cands, cfg.acquisition_config())
    return acq.run(state, strategy, cfg.rounds)


def sweep(data, cfg, weights=DEFAULT_SWEEP, owned=None, cands=None):
    """Weighted-objective runs for each weight; returns the Pareto table."""
    if owned is None:
        owned, cands = partition_columns(data, cfg)
    table = []
    for w in weights:
        recs = _trajectory(data, owned, cands, cfg, acq.Strategy(acq.WEIGHTED, float(w)))
        table.append({
            "weight": float(w),
            "rounds": [{"round": r.round, "features": list(r.features), "bias": r.bias,
                        "auc_all": r.auc_all} for r in recs],
        })
    return table


def _verification(records):
    out = []
    for r in records:
        if r.theory_bound is None or r.analytic_gain is None:
            continue
        out.append({"round": r.round, "bound": r.theory_bound, "gain": r.analytic_gain,
                    "margin": r.analytic_gain - r.theory_bound})
    return out


def run_experiment(data, cfg):
    """Run the configured strategy (and optional sweep) and assemble a :class:`Report`."""
    if not isinstance(data, GroupedColumns):
        raise TypeError("data must be GroupedColumns")
    owned, cands = partition_columns(data, cfg)
    recorder = _Recorder()
    state = acq.AcquisitionState(data, owned, cands, cfg.acquisition_config())
    records = acq.run(state, acq.Strategy(cfg.strategy, cfg.weight), cfg.rounds,
                      on_round=recorder)
    intervals = _intervals(state.data, recorder, cfg.bootstrap, cfg.seed) if cfg.bootstrap else []
    pareto = sweep(data, cfg, cfg.sweep_weights, owned, cands) if cfg.sweep_weights else []
    return Report(cfg.to_dict(), list(owned), records, intervals, pareto, _verification(records))


def _clean(obj):
    """Replace non-finite floats with None so the JSON is standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def report_json(report):
    return json.dumps(_clean(report.to_dict()), indent=2, sort_keys=True) + "\n"


def report_csv(report):
    """Round table, one row per record, rates rounded to 4 decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.records:
        writer.writerow([r.round, "+".join(r.feature_names), f"{r.auc_a:.4f}", f"{r.auc_b:.4f}",
                         f"{r.auc_all:.4f}", f"{r.bias:.4f}", r.disadvantaged])
    return buf.getvalue()


def emit(report, path, fmt="json"):
    """Write the report as JSON (authoritative) or as the round CSV table."""
    if fmt not in ("json", "csv"):
        raise ValueError("fmt must be 'json' or 'csv'")
    text = report_json(report) if fmt == "json" else report_csv(report)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path

