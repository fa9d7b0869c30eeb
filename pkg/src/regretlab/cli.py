"""Command-line entry points.

Subcommands:

* ``run <config> --out <dir>``  execute a configured suite, emit CSVs
* ``fig1 --out <dir>``          execute the built-in five-algorithm suite
* ``slopes <regret.csv>``       recompute the slope summary from a regret CSV
* ``validate``                  run the deterministic self-check registry

Exit codes: 0 success, 1 self-check or run failure, 2 configuration errors.
``REGRETLAB_SEED`` provides the master seed when neither the config file nor
``--seed`` does.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time
from pathlib import Path

from . import io as rio
from .config import ConfigError, parse_config
from .harness import fig1_suite, run_suite
from .selfcheck import run_selfchecks

__all__ = ["main", "cli_main"]


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--threads", type=int, default=1, help="replicate parallelism")
    parser.add_argument("--budget", type=int, default=None, help="evaluation budget override")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regretlab",
        description="Noisy black-box optimization lab: regret metrics and slope benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured suite and emit CSVs")
    p_run.add_argument("config", type=Path, help="suite configuration file")
    p_run.add_argument("--out", type=Path, required=True, help="output directory")
    _add_common(p_run)

    p_fig = sub.add_parser("fig1", help="execute the built-in benchmark suite")
    p_fig.add_argument("--out", type=Path, required=True, help="output directory")
    p_fig.add_argument("--replicates", type=int, default=10)
    _add_common(p_fig)

    p_sl = sub.add_parser("slopes", help="recompute the slope summary from a regret CSV")
    p_sl.add_argument("csv", type=Path, help="regret CSV emitted by run/fig1")
    p_sl.add_argument("--out", type=Path, default=None, help="write here instead of stdout")
    p_sl.add_argument("--window-fraction", type=float, default=0.01,
                      help="fit window starts at budget * fraction (default 0.01)")

    p_val = sub.add_parser("validate", help="run oracle-equivalence and invariant self-checks")
    p_val.add_argument("--quiet", action="store_true")
    return parser


def _env_seed() -> int | None:
    raw = os.environ.get("REGRETLAB_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        print(f"error: REGRETLAB_SEED={raw!r} is not an integer", file=sys.stderr)
        raise SystemExit(2)


def _apply_overrides(specs, args):
    changes = {}
    if args.budget is not None:
        changes["budget"] = args.budget
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if changes:
        specs = [dataclasses.replace(s, **changes) for s in specs]
    return specs


def _execute_suite(specs, args) -> int:
    quiet = args.quiet

    def progress(spec):
        if not quiet:
            print(
                f"running {spec.spec_id}: d={spec.dim} noise={spec.noise_std} "
                f"budget={spec.budget} replicates={spec.replicates}",
                flush=True,
            )

    t0 = time.time()
    suite = run_suite(specs, threads=args.threads, progress=progress)
    args.out.mkdir(parents=True, exist_ok=True)
    regret_path = args.out / "regret.csv"
    slopes_path = args.out / "slopes.csv"
    rio.write_regret_csv(suite.results, regret_path)
    rio.write_slope_summary(suite.results, slopes_path)
    if not quiet:
        print(f"wrote {regret_path} and {slopes_path} in {time.time() - t0:.1f}s")
    for spec_id, message in suite.failures:
        print(f"error: {spec_id} failed: {message}", file=sys.stderr)
    return 1 if suite.failures else 0


def cli_main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "run":
        try:
            text = args.config.read_text()
        except OSError as exc:
            print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
            return 2
        default_seed = args.seed if args.seed is not None else _env_seed()
        try:
            specs = parse_config(text, default_seed=default_seed, suite_id=args.config.stem)
        except ConfigError as exc:
            for line, message in exc.errors:
                where = f"{args.config}:{line}" if line else str(args.config)
                print(f"error: {where}: {message}", file=sys.stderr)
            return 2
        specs = _apply_overrides(specs, args)
        return _execute_suite(specs, args)

    if args.command == "fig1":
        seed = args.seed if args.seed is not None else _env_seed()
        specs = fig1_suite(replicates=args.replicates, **({"master_seed": seed} if seed is not None else {}))
        if args.budget is not None:
            specs = [dataclasses.replace(s, budget=args.budget) for s in specs]
        return _execute_suite(specs, args)

    if args.command == "slopes":
        try:
            rows = rio.slope_summary_from_csv(args.csv, window_fraction=args.window_fraction)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        if args.out is not None:
            rio.write_slope_rows(rows, args.out)
        else:
            sys.stdout.write(rio.render_rows(rows))
        return 0

    if args.command == "validate":
        ok = run_selfchecks(report=None if args.quiet else print)
        return 0 if ok else 1

    raise AssertionError(f"unhandled command {args.command}")


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
