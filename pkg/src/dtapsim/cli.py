"""Command-line interface.

    dtapsim run --preset paper-200k --algorithm wpl --seed 1 --out runs/wpl-1
    dtapsim sweep --preset paper-200k --seeds 1..5 --algorithms wpl,giga-wolf

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, PRESETS, make_config
from .runner import run, sweep

_FLAG_FIELDS = [
    ("--grid-rows", "grid_rows", int),
    ("--grid-cols", "grid_cols", int),
    ("--adjacent-delay", "adjacent_delay", int),
    ("--generator-rows", "generator_rows", int),
    ("--generator-cols", "generator_cols", int),
    ("--arrival-rate", "arrival_rate", float),
    ("--service-rate", "service_rate", float),
    ("--algorithm", "algorithm", str),
    ("--eta", "eta", float),
    ("--alpha", "alpha", float),
    ("--epsilon-floor", "epsilon_floor", float),
    ("--duration", "duration", int),
    ("--window", "window", int),
    ("--seed", "seed", int),
    ("--hop-cap", "hop_cap", int),
    ("--dump-every", "dump_every", int),
]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="named scenario preset")
    for flag, dest, ftype in _FLAG_FIELDS:
        parser.add_argument(flag, dest=dest, type=ftype, default=None)
    parser.add_argument("--dump-policies", dest="dump_policies", action="store_true", default=None)
    parser.add_argument("--out", dest="output_dir", default=None, help="output directory")


def _overrides(args: argparse.Namespace) -> dict:
    keys = [dest for _, dest, _ in _FLAG_FIELDS] + ["dump_policies", "output_dir"]
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


def _parse_seed_range(text: str) -> list[int]:
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            lo_i, hi_i = int(lo), int(hi)
        except ValueError:
            raise ConfigError(f"bad seed range {text!r}; expected A..B") from None
        if hi_i < lo_i:
            raise ConfigError(f"bad seed range {text!r}: end before start")
        return list(range(lo_i, hi_i + 1))
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad seed list {text!r}") from None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dtapsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one simulation")
    _add_config_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="execute a batch of independent runs")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--seeds", required=True, help="seed range A..B or comma list")
    p_sweep.add_argument("--algorithms", help="comma list, e.g. wpl,giga-wolf")
    p_sweep.add_argument("--etas", help="comma list of learning rates")
    p_sweep.add_argument("--parallel", type=int, default=1)

    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            cfg = make_config(args.preset, args.config, _overrides(args))
        else:
            overrides = _overrides(args)
            overrides.pop("output_dir", None)
            cfg = make_config(args.preset, args.config, overrides)
            seeds = _parse_seed_range(args.seeds)
            algorithms = args.algorithms.split(",") if args.algorithms else None
            etas = [float(e) for e in args.etas.split(",")] if args.etas else None
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "run":
            result = run(cfg)
            s = result.summary
            print(f"run complete: {result.output_dir}")
            print(
                f"  tasks={s['tasks_completed']} mean_tst={s['mean_tst']:.4g} "
                f"final_atst={s['final_window_atst']:.4g} "
                f"final_entropy={s['final_entropy_mean']:.4g}"
            )
        else:
            index = sweep(
                cfg,
                seeds=seeds,
                algorithms=algorithms,
                etas=etas,
                out_root=args.output_dir,
                parallel=args.parallel,
            )
            print(f"sweep complete: {index}")
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
