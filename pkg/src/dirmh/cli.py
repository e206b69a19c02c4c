"""Command line entry point: ``dirmh run | diagnose | plot``.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config
from .diagnostics import diagnose, move_rate
from .exceptions import ConfigError
from .experiment import run_experiment
from .io import read_chain_csv

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out if args.out is not None else config.output_dir
    run_experiment(config, out_dir=out, workers=args.workers, plots=not args.no_plots)
    print(f"wrote {len(config.kernels) * len(config.seeds)} runs to {out}")
    return EXIT_OK


def _cmd_diagnose(args) -> int:
    states = read_chain_csv(args.chain)
    # only states are available here, so acceptance is the observed move rate
    report = diagnose(states, move_rate(states), args.batch_size)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_plot(args) -> int:
    from .plots import acf_svg, trace_svg

    states = read_chain_csv(args.chain)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace_svg(states, out / "trace.svg")
    acf_svg(states, out / "acf.svg", args.max_lag)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirmh", description="Directional Metropolis-Hastings experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every (kernel, seed) pair of a JSON config")
    run.add_argument("config")
    run.add_argument("--out", default=None, help="override output_dir from the config")
    run.add_argument("--workers", type=int, default=None, help="parallel runs (default: $DIRMH_THREADS or 1)")
    run.add_argument("--no-plots", action="store_true")
    run.set_defaults(func=_cmd_run)

    diag = sub.add_parser("diagnose", help="diagnostics report for a chain.csv")
    diag.add_argument("chain")
    diag.add_argument("--batch-size", type=int, default=None)
    diag.add_argument("--out", default=None, help="write JSON here instead of stdout")
    diag.set_defaults(func=_cmd_diagnose)

    plot = sub.add_parser("plot", help="trace and ACF SVGs for a chain.csv")
    plot.add_argument("chain")
    plot.add_argument("--out", required=True)
    plot.add_argument("--max-lag", type=int, default=50)
    plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
