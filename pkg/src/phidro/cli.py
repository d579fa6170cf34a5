"""Command-line interface: run, bias, and schedules subcommands.

Exit codes: 0 success, 1 runtime or solver failure, 2 configuration
error (including bad command-line arguments).
"""

from __future__ import annotations

import argparse
import copy
import dataclasses
import sys

from .config import ConfigError, ExperimentConfig, load_config
from .harness import cmd_bias, cmd_run, cmd_schedules
from .inner import SolverError
from .sampling import SampleMode

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phidro",
        description=(
            "Distributionally robust learning experiments: growing-subsample "
            "subgradient descent with exact inner maximization over "
            "divergence balls."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument(
            "--seed", type=int, default=None, help="replace the config's seed list"
        )
        p.add_argument(
            "--out-dir", default=None, help="override the output directory"
        )

    p_run = sub.add_parser(
        "run", help="train with every configured method, one trace per (method, seed)"
    )
    common(p_run)

    p_bias = sub.add_parser(
        "bias", help="subsampled-gradient bias against the budget inflation rate"
    )
    common(p_bias)
    p_bias.add_argument(
        "--grid",
        default="32,64,128",
        help="comma list of subsample sizes",
    )
    p_bias.add_argument(
        "--resamples", type=int, default=2000, help="index draws per size"
    )
    p_bias.add_argument(
        "--mode",
        choices=("with", "without"),
        default=None,
        help="restrict to one sampling mode (default: both)",
    )

    p_sched = sub.add_parser(
        "schedules", help="compare growth schedules at equal cumulative work"
    )
    common(p_sched)
    p_sched.add_argument(
        "--schedules",
        required=True,
        help="comma list like geometric:0.5,polynomial:1.0,fixed:64",
    )
    return parser


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    resolved = copy.deepcopy(config.resolved)
    if args.seed is not None:
        updates["seeds"] = (args.seed,)
        resolved["seeds"] = [args.seed]
    if args.out_dir is not None:
        updates["out_dir"] = args.out_dir
        resolved["out_dir"] = args.out_dir
    if not updates:
        return config
    return dataclasses.replace(config, resolved=resolved, **updates)


def _parse_grid(text: str):
    try:
        grid = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"grid: expected comma-separated integers, got {text!r}")
    if not grid:
        raise ConfigError("grid: need at least one subsample size")
    return grid


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _apply_overrides(load_config(args.config), args)
        if args.command == "run":
            return cmd_run(config)
        if args.command == "bias":
            if args.mode == "with":
                modes = (SampleMode.WITH_REPLACEMENT,)
            elif args.mode == "without":
                modes = (SampleMode.WITHOUT_REPLACEMENT,)
            else:
                modes = (
                    SampleMode.WITHOUT_REPLACEMENT,
                    SampleMode.WITH_REPLACEMENT,
                )
            return cmd_bias(config, _parse_grid(args.grid), args.resamples, modes)
        return cmd_schedules(config, args.schedules)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
