"""Command line front end: ``run``, ``evaluate``, ``cover`` and ``bounds``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence


from .. import metrics as M
from ..errors import ArgumentError, ConfigError, UnsupportedMetricError
from ..intervals import cover
from .config import ALGORITHMS, ExperimentConfig
from .environments import ENVIRONMENTS
from .runner import comparator_sets, fmt, metric_rows, read_comparators, read_trace, run_experiment, scan_affordable

METRICS = ("all", "cumulative_loss", "static_regret", "dynamic_regret", "restricted_dynamic_regret",
           "sa_regret", "weak_adaptive_regret", "path_length", "squared_path_length", "function_variation")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        overrides = {}
    else:
        if not args.algorithm or not args.env:
            raise ConfigError("without --config, both --algorithm and --env are required")
        cfg = None
        overrides = {"algorithm": args.algorithm, "environment": args.env}
    horizon = args.horizon
    if args.rounds is not None:
        algo = args.algorithm or (cfg.algorithm if cfg else None)
        if algo == "aod":
            raise ConfigError("AOD needs a fixed --horizon, not --rounds")
        horizon = args.rounds
    for key, value in (("algorithm", args.algorithm), ("environment", args.env), ("horizon", horizon),
                       ("eta", args.eta), ("seed", args.seed), ("segments", args.segments),
                       ("dimension", args.dimension), ("policy", args.policy),
                       ("trace", args.trace), ("report", args.report)):
        if value is not None:
            overrides[key] = value
    if cfg is None:
        if "horizon" not in overrides:
            raise ConfigError("--horizon (or --rounds for open-ended learners) is required")
        return ExperimentConfig(**overrides)
    data = {**cfg.__dict__, **overrides}
    return ExperimentConfig(**data)


def cmd_run(args) -> int:
    result = run_experiment(_config_from_args(args))
    if not result.config.report:
        sys.stdout.write(result.report_text)
    for row in result.violations:
        print(f"VIOLATION {row.check} at {row.where}: measured {fmt(row.measured)} > bound {fmt(row.bound)}",
              file=sys.stderr)
    print(f"{'PASS' if result.passed else 'FAIL'} {len(result.rows)} rows, {len(result.violations)} violations",
          file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_VIOLATION


def cmd_evaluate(args) -> int:
    trace = read_trace(args.trace)
    if args.metric == "all":
        comps = comparator_sets(trace, args.comparators)
        if args.policy in comps:
            comps = {args.policy: comps[args.policy], **comps}
        profile = M.sa_regret_profile(trace) if scan_affordable(trace) else None
        for row in metric_rows(trace, comps, profile):
            label = row.check if not row.where else f"{row.check}[{row.where}]"
            print(f"{label},{fmt(row.measured)}")
        return EXIT_OK

    def comparators():
        if args.comparators:
            return read_comparators(args.comparators, trace.dimension)
        if args.policy == "piecewise-constant":
            return M.piecewise_constant_comparators(trace)
        return M.minimizer_comparators(trace)

    name = args.metric
    if name == "cumulative_loss":
        value = trace.cumulative_loss
    elif name == "static_regret":
        value = M.static_regret(trace)
    elif name == "dynamic_regret":
        value = M.dynamic_regret(trace, comparators())
    elif name == "restricted_dynamic_regret":
        value = M.restricted_dynamic_regret(trace)
    elif name == "sa_regret":
        if args.tau is None:
            raise ArgumentError("sa_regret needs --tau")
        value = M.sa_regret(trace, args.tau)
    elif name == "weak_adaptive_regret":
        value = M.weak_adaptive_regret(trace)
    elif name == "path_length":
        value = M.path_length(comparators())
    elif name == "squared_path_length":
        value = M.squared_path_length(comparators())
    else:
        value = M.function_variation(trace)
    print(f"{name},{fmt(value)}")
    return EXIT_OK


def cmd_cover(args) -> int:
    for iv in cover(args.r, args.s, args.system, args.horizon):
        print(f"{iv.start} {iv.end} {iv.level}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    D, G, P = args.D, args.G, args.P
    th = args.theorem
    if th == "3":
        value = M.bound_thm3(_need(args, "tau"), _need(args, "T"), D, G)
    elif th == "4":
        value = M.bound_thm4(_need(args, "T"), P, D, G)
    elif th == "5":
        s = _need(args, "s")
        length = args.length if args.length is not None else s
        value = M.bound_thm5(length, s, P, D, G)
    else:
        value = M.bound_thm7(_need(args, "T"), P, D, G)
    print(f"thm{th},{fmt(value)}")
    return EXIT_OK


def _need(args, name: str):
    value = getattr(args, name)
    if value is None:
        raise ArgumentError(f"--{name} is required for theorem {args.theorem}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynadapt", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment, write trace and report")
    run.add_argument("--config")
    run.add_argument("--algorithm", choices=ALGORITHMS)
    run.add_argument("--env", choices=ENVIRONMENTS)
    run.add_argument("--eta", help="'auto' or a positive number (ogd only)")
    run.add_argument("--horizon", type=int)
    run.add_argument("--rounds", type=int, help="run length for horizon-free learners")
    run.add_argument("--seed", type=int)
    run.add_argument("--segments", type=int)
    run.add_argument("--dimension", type=int)
    run.add_argument("--policy", choices=("minimizers", "piecewise-constant", "file"))
    run.add_argument("--trace")
    run.add_argument("--report")
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("evaluate", help="compute a metric from a trace file")
    ev.add_argument("--trace", required=True)
    ev.add_argument("--metric", required=True, choices=METRICS)
    ev.add_argument("--tau", type=int)
    ev.add_argument("--policy", choices=("minimizers", "piecewise-constant"), default="minimizers")
    ev.add_argument("--comparators", help="file with one comparator point per line")
    ev.set_defaults(func=cmd_evaluate)

    cv = sub.add_parser("cover", help="cover [from, to] with covering intervals")
    cv.add_argument("--system", choices=("dgc", "gc"), required=True)
    cv.add_argument("--from", dest="r", type=int, required=True)
    cv.add_argument("--to", dest="s", type=int, required=True)
    cv.add_argument("--horizon", type=int)
    cv.set_defaults(func=cmd_cover)

    bd = sub.add_parser("bounds", help="evaluate a regret bound")
    bd.add_argument("--theorem", choices=("3", "4", "5", "7"), required=True)
    bd.add_argument("--T", type=int)
    bd.add_argument("--tau", type=int)
    bd.add_argument("--s", type=int, help="last round of the interval (--theorem 5)")
    bd.add_argument("--length", type=int, help="interval length (--theorem 5, default s)")
    bd.add_argument("--P", type=float, default=0.0, help="path length")
    bd.add_argument("--D", type=float, default=1.0)
    bd.add_argument("--G", type=float, default=1.0)
    bd.set_defaults(func=cmd_bounds)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ArgumentError, UnsupportedMetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
