"""Command-line entry point: ``synth``, ``acquire``, ``verify`` and ``sweep``.

Exit codes: 0 on success, 1 for data/input errors, 2 for numerical
failures (including guarantee violations found by ``verify``). Errors are
reported as one JSON line on stderr.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import acquisition as acq
from .bounds import lemma_checks
from .datagen import GammaConfig, GuyonConfig, gen_gamma, gen_guyon
from .exceptions import DataError, FairAUCError, NumericError
from .experiment import DEFAULT_SWEEP, ExperimentConfig, emit, report_json, run_experiment, sweep
from .instances import check_guarantee, check_noise, guarantee_instance, noise_instance
from .io import ingest, ingest_features, write_dataset
from .moments import GroupedColumns

logger = logging.getLogger("fairauc")

SEED_ENV = "FAIRAUC_SEED"


class _Failure(Exception):
    def __init__(self, kind, message, code):
        super().__init__(message)
        self.kind = kind
        self.code = code


def default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise _Failure("DataError", f"{SEED_ENV} must be an integer, got {raw!r}", 1) from None


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()] if text else None


def _float_list(text):
    try:
        return tuple(float(t) for t in _csv_list(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV with feature, group and class columns")
    p.add_argument("--aux", help="optional CSV of candidate columns, row-aligned with --data")
    p.add_argument("--group-col", default="group")
    p.add_argument("--class-col", default="label")
    p.add_argument("--log-transform", action="store_true", help="log1p numeric columns")
    p.add_argument("--categorical", help="comma-separated columns to one-hot encode")


def _add_run_args(p):
    p.add_argument("--owned", help="comma-separated starting columns (names or indices)")
    p.add_argument("--n-owned", type=int, default=1,
                   help="number of random starting columns when --owned is absent")
    p.add_argument("--candidates", help="comma-separated purchasable columns")
    p.add_argument("--rounds", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--scoring", choices=("logistic", "fld"), default="logistic")
    p.add_argument("--no-protected", dest="use_protected", action="store_false",
                   help="fit one pooled scoring model instead of one per group")
    p.add_argument("--holdout", type=float, default=0.0,
                   help="fraction of rows held out for reported AUCs")
    p.add_argument("--zero-correlation", action="store_true")
    p.add_argument("--analytic-bias", action="store_true")
    p.add_argument("--bootstrap", type=int, default=1000, help="bootstrap resamples (0 disables)")
    p.add_argument("--seed", type=int, default=None, help=f"overrides ${SEED_ENV}")
    p.add_argument("--out", help="JSON report path (stdout if omitted)")
    p.add_argument("--csv", help="optional round-table CSV path")


def build_parser():
    parser = argparse.ArgumentParser(prog="fairauc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--kind", choices=("guyon", "gamma1", "gamma2"), default="guyon")
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--n-features", type=int, default=50)
    p.add_argument("--n-informative", type=int, default=25)
    p.add_argument("--group-a-fraction", type=float, default=None)
    p.add_argument("--base-rate", type=float, default=0.25)
    p.add_argument("--separation", type=float, default=0.4)
    p.add_argument("--shared-correlation", action="store_true",
                   help="use one correlation structure for both groups (guyon)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("acquire", help="run one acquisition strategy")
    _add_data_args(p)
    _add_run_args(p)
    p.add_argument("--strategy", default="fairauc",
                   help="fairauc, maxauc, minbias, random, weighted[:w], bias_penalty[:w]")
    p.add_argument("--weight", type=float, default=None)
    p.add_argument("--batch", choices=acq.BATCH_MODES, default=acq.SINGLE)
    p.add_argument("--noisy", action="store_true")
    p.add_argument("--sweep-weights", type=_float_list, default=(),
                   help="also attach a Pareto sweep over these weights")

    p = sub.add_parser("sweep", help="Pareto sweep over weighted objectives")
    _add_data_args(p)
    _add_run_args(p)
    p.add_argument("--weights", type=_float_list, default=DEFAULT_SWEEP)

    p = sub.add_parser("verify", help="check the analytic guarantees on random instances")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--max-dim", type=int, default=5)
    p.add_argument("--candidates", type=int, default=10)
    p.add_argument("--noise-instances", type=int, default=50)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="JSON summary path (stdout if omitted)")
    return parser


def _load(args):
    cats = _csv_list(args.categorical)
    data = ingest(args.data, args.group_col, args.class_col, args.log_transform, cats)
    candidates = _csv_list(args.candidates)
    if args.aux:
        aux, names = ingest_features(args.aux, args.log_transform, cats, data.group)
        if aux.shape[0] != data.n_rows:
            raise DataError(f"--aux has {aux.shape[0]} rows, --data has {data.n_rows}")
        if set(names) & set(data.feature_names):
            raise DataError("--aux column names collide with --data columns")
        owned = data.feature_names
        data = GroupedColumns(np.hstack([data.features, aux]), data.group, data.label,
                              data.feature_names + names, data.group_names)
        candidates = candidates or list(names)
        if args.owned is None:
            args.owned = ",".join(owned)
    return data, candidates


def _config(args, data_path, candidates, **extra):
    seed = args.seed if args.seed is not None else default_seed()
    owned = _csv_list(args.owned)
    return ExperimentConfig(
        rounds=args.rounds, epsilon=args.epsilon, scoring=args.scoring,
        use_protected=args.use_protected, holdout=args.holdout,
        zero_correlation=args.zero_correlation, analytic_bias=args.analytic_bias,
        owned=tuple(owned) if owned else None,
        candidates=tuple(candidates) if candidates else None,
        n_owned=args.n_owned, bootstrap=args.bootstrap, seed=seed, data=data_path, **extra)


def _write_text(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_synth(args):
    seed = args.seed if args.seed is not None else default_seed()
    if args.kind == "guyon":
        frac = 0.7 if args.group_a_fraction is None else args.group_a_fraction
        cfg = GuyonConfig(n=args.n, n_features=args.n_features, n_informative=args.n_informative,
                          group_a_fraction=frac, base_rate=args.base_rate,
                          separation=args.separation,
                          per_group_correlation=not args.shared_correlation, seed=seed)
        data = gen_guyon(cfg).data
    else:
        frac = 0.95 if args.group_a_fraction is None else args.group_a_fraction
        preset = GammaConfig.dataset1 if args.kind == "gamma1" else GammaConfig.dataset2
        n_uninf = args.n_features - args.n_informative
        data = gen_gamma(preset(n=args.n, n_informative=args.n_informative,
                                n_uninformative=n_uninf, group_a_fraction=frac,
                                base_rate=args.base_rate, seed=seed))
    write_dataset(data, args.out)
    logger.info("wrote %s (%d rows, %d features)", args.out, data.n_rows, data.n_features)
    return 0


def cmd_acquire(args):
    data, candidates = _load(args)
    strategy = acq.Strategy.parse(args.strategy, args.weight)
    cfg = _config(args, args.data, candidates, strategy=strategy.kind, weight=strategy.weight,
                  batch=args.batch, noisy=args.noisy, sweep_weights=tuple(args.sweep_weights))
    report = run_experiment(data, cfg)
    if args.out:
        emit(report, args.out, "json")
    else:
        sys.stdout.write(report_json(report))
    if args.csv:
        emit(report, args.csv, "csv")
    return 0


def cmd_sweep(args):
    data, candidates = _load(args)
    cfg = _config(args, args.data, candidates, strategy=acq.WEIGHTED, sweep_weights=args.weights)
    table = sweep(data, cfg, args.weights)
    text = json.dumps({"config": cfg.to_dict(), "pareto": table}, indent=2, sort_keys=True)
    _write_text(text + "\n", args.out)
    return 0


def cmd_verify(args):
    seed = args.seed if args.seed is not None else default_seed()
    rng = np.random.default_rng(seed)
    violations, out_of_premise, margins = [], 0, []
    for i in range(args.instances):
        d = int(rng.integers(1, args.max_dim + 1))
        rep = check_guarantee(guarantee_instance(rng, d, args.candidates))
        margins.append(rep.margin)
        out_of_premise += len(rep.out_of_premise)
        violations.extend({"instance": i, "kind": k, "candidate": int(c), "margin": m}
                          for k, c, m in rep.violations)
    noise_bad = []
    cases = {"A": 0, "B": 0, "equal": 0}
    for i in range(args.noise_instances):
        chk = check_noise(*noise_instance(rng))
        cases[chk.case] += 1
        if not (chk.bias_ok and chk.aucs_ok) or (chk.case == "A" and chk.achieved_bias > 1e-8):
            noise_bad.append(i)
    lemmas = lemma_checks()
    summary = {
        "guarantee": {"instances": args.instances, "violations": violations,
                      "out_of_premise": out_of_premise,
                      "min_margin": min(margins) if margins else None},
        "noise": {"instances": args.noise_instances, "cases": cases, "failures": noise_bad},
        "lemmas": {"inverting_points": lemmas.n_inverting, "change_points": lemmas.n_change,
                   "min_margin_inverting": lemmas.min_margin_inverting,
                   "min_margin_change": lemmas.min_margin_change,
                   "violations": [list(v) for v in lemmas.violations]},
    }
    _write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", args.out)
    if violations or noise_bad or lemmas.violations:
        raise _Failure("BoundViolation", "analytic guarantee check failed", 2)
    return 0


COMMANDS = {"synth": cmd_synth, "acquire": cmd_acquire, "sweep": cmd_sweep, "verify": cmd_verify}


def _fail(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message)}) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except _Failure as exc:
        return _fail(exc.kind, exc, exc.code)
    except NumericError as exc:
        return _fail(type(exc).__name__, exc, 2)
    except (DataError, FairAUCError, ValueError, OSError) as exc:
        return _fail(type(exc).__name__, exc, 1)
    except ArithmeticError as exc:
        return _fail(type(exc).__name__, exc, 2)


if __name__ == "__main__":
    sys.exit(main())
