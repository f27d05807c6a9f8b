"""Command-line front end.

    sarbandits experiments list
    sarbandits experiments show N
    sarbandits run (--experiment N | --config PATH) [--trials N] [--seed S] [--budget B]
                   [--ties random|index] [--workers W] [--out FILE.csv]
    sarbandits bounds (--config PATH | --experiment N) [--budget B]
    sarbandits complexity (--config PATH | --experiment N) [--m M]

Exit codes: 0 success, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Optional, Sequence

from .algorithms import BudgetTooSmall
from .complexity import (
    InfeasibleComplexity,
    bound_theorem1,
    bound_theorem2,
    complexity_m_best,
    complexity_multibandit,
    gaps_m_best,
)
from .experiments import (
    MULTI_BANDIT,
    ConfigError,
    ExperimentConfig,
    builtin,
    builtin_experiments,
    dumps,
    load_config,
)
from .model import PreconditionError
from .simulation import TIES, SweepResult, run_multibandit, sweep_over_m

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

RUN_COLUMNS = [
    "experiment", "strategy", "params", "m", "n", "trials", "errors",
    "p_hat", "ci_low", "ci_high", "bound", "seed",
]
BOUND_COLUMNS = ["experiment", "m", "n", "H1", "H2", "bound", "sandwich_low", "sandwich_high"]
COMPLEXITY_COLUMNS = ["experiment", "m", "H1", "H2", "contributing", "interchangeable"]


def _num(x: Optional[float]) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _writer(stream):
    return csv.writer(stream, lineterminator="\n")


def sweep_csv(result: SweepResult, seed: int) -> str:
    out = io.StringIO()
    w = _writer(out)
    w.writerow(RUN_COLUMNS)
    for row in result.rows:
        est = row.estimate
        w.writerow([
            row.experiment, row.strategy.name, row.strategy.params,
            "" if row.m is None else row.m, row.n, est.trials, est.errors,
            _num(est.p_hat), _num(est.ci_low), _num(est.ci_high), _num(row.bound), seed,
        ])
    return out.getvalue()


def summary_table(result: SweepResult) -> str:
    lines = [f"{'strategy':<12} {'m':>3} {'n':>7} {'p_hat':>9} {'95% CI':>21}"]
    for row in result.rows:
        est = row.estimate
        m = "-" if row.m is None else row.m
        lines.append(
            f"{str(row.strategy):<12} {m:>3} {row.n:>7} {est.p_hat:>9.4f} "
            f"[{est.ci_low:.4f}, {est.ci_high:.4f}]"
        )
    return "\n".join(lines)


def run_config(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    n = cfg.resolve_budget()
    if cfg.kind == MULTI_BANDIT:
        return run_multibandit(
            cfg.instance(), n, cfg.trials, cfg.seed, workers, cfg.name, ties=cfg.ties
        )
    return sweep_over_m(
        cfg.instance(), cfg.strategies, cfg.m_values, n, cfg.trials, cfg.seed,
        workers=workers, experiment=cfg.name, ties=cfg.ties,
    )


def bounds_csv(cfg: ExperimentConfig) -> str:
    n = cfg.resolve_budget()
    out = io.StringIO()
    w = _writer(out)
    w.writerow(BOUND_COLUMNS)
    if cfg.kind == MULTI_BANDIT:
        multi = cfg.instance()
        cells = [(None, lambda: complexity_multibandit(multi),
                  lambda H2: bound_theorem2(n, multi.M, multi.K, H2))]
    else:
        cells = [(m, lambda m=m: complexity_m_best(cfg.means, m),
                  lambda H2: bound_theorem1(n, cfg.K, H2)) for m in cfg.m_values]
    for m, report_of, bound_of in cells:
        m_col = "" if m is None else m
        try:
            report = report_of()
        except InfeasibleComplexity:
            w.writerow([cfg.name, m_col, n] + ["inf"] * 5)
            continue
        low, high = report.sandwich()
        bound = min(1.0, bound_of(report.H2))
        w.writerow([cfg.name, m_col, n, _num(report.H1), _num(report.H2),
                    _num(bound), _num(low), _num(high)])
    return out.getvalue()


def complexity_csv(cfg: ExperimentConfig, only_m: Optional[int] = None) -> str:
    out = io.StringIO()
    w = _writer(out)
    w.writerow(COMPLEXITY_COLUMNS)
    if cfg.kind == MULTI_BANDIT:
        report = complexity_multibandit(cfg.instance())
        w.writerow([cfg.name, "", _num(report.H1), _num(report.H2), report.count, ""])
        return out.getvalue()
    m_values = [only_m] if only_m is not None else list(range(1, cfg.K))
    for m in m_values:
        profile = gaps_m_best(cfg.means, m)
        tied = sum(g is None for g in profile.gaps)
        try:
            report = complexity_m_best(cfg.means, m)
            w.writerow([cfg.name, m, _num(report.H1), _num(report.H2), report.count, tied])
        except InfeasibleComplexity:
            w.writerow([cfg.name, m, "inf", "inf", 0, tied])
    return out.getvalue()


def _load(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = builtin(args.experiment)
    overrides = {}
    for key in ("trials", "seed", "budget", "ties"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return cfg.with_overrides(**overrides) if overrides else cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sarbandits",
        description="Fixed-budget m-best and multi-bandit arm identification simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    exp = sub.add_parser("experiments", help="list or show the built-in experiments")
    exp_sub = exp.add_subparsers(dest="action", required=True)
    exp_sub.add_parser("list")
    show = exp_sub.add_parser("show", help="print a built-in experiment as a config file")
    show.add_argument("number", type=int)

    def source(p, required=True):
        group = p.add_mutually_exclusive_group(required=required)
        group.add_argument("--experiment", type=int, metavar="1..6")
        group.add_argument("--config", metavar="PATH")

    run = sub.add_parser("run", help="Monte Carlo sweep, CSV output")
    source(run)
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--budget", type=int)
    run.add_argument("--ties", choices=TIES, help="tie-breaking rule (default from config)")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out", metavar="FILE.csv")

    bounds = sub.add_parser("bounds", help="theoretical error bounds, CSV output")
    source(bounds)
    bounds.add_argument("--budget", type=int)

    comp = sub.add_parser("complexity", help="H1/H2 per m, CSV output")
    source(comp)
    comp.add_argument("--m", type=int)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "experiments":
            if args.action == "list":
                for i, cfg in enumerate(builtin_experiments(), 1):
                    print(f"{i}  {cfg.name:<5} K={cfg.K:<3} n={cfg.resolve_budget():<6} {cfg.description}")
            else:
                sys.stdout.write(dumps(builtin(args.number)))
            return EXIT_OK
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "run":
            result = run_config(cfg, workers=args.workers)
            text = sweep_csv(result, cfg.seed)
            if args.out:
                with open(args.out, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
                print(summary_table(result))
            else:
                sys.stdout.write(text)
        elif args.command == "bounds":
            sys.stdout.write(bounds_csv(cfg))
        else:
            if args.m is not None and cfg.kind != MULTI_BANDIT and not 1 <= args.m <= cfg.K - 1:
                raise PreconditionError(f"--m must be in 1..{cfg.K - 1}")
            sys.stdout.write(complexity_csv(cfg, args.m))
    except (BudgetTooSmall, PreconditionError, InfeasibleComplexity, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
