"""Command line interface.

Subcommands: run (experiment), synth (write a synthetic stream to CSV),
regret (regret report). Exit codes: 0 ok, 1 config error, 2 runtime
error.
"""

from __future__ import annotations

import argparse
import sys

from .data import Task
from .experiment import (
    ConfigError,
    emit_regret_report,
    load_config,
    run_experiment,
    write_synthetic_stream,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onlinemkl",
        description="Streaming multi-kernel learning experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run the configured algorithms and write telemetry"),
        ("synth", "write the configured synthetic stream to CSV"),
        ("regret", "write regret traces against the batch comparator"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to a JSON config file")
        cmd.add_argument("--out", default=None, help="output directory (overrides config)")
        cmd.add_argument("--seed", type=int, default=None, help="seed (overrides config)")
        if name != "synth":
            cmd.add_argument(
                "--no-figures",
                action="store_true",
                help="skip rendering PNG figures next to the CSV output",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.command == "run":
            summary = run_experiment(
                config, out_dir=args.out, render_figures=not args.no_figures
            )
            for row in summary:
                print(
                    f"{row['algorithm']}: final "
                    f"{'MSE' if row['task'] == Task.REGRESSION.value else 'error'} "
                    f"= {row['final_metric']:.6g} "
                    f"({row['wall_seconds']:.2f} s, "
                    f"{row['peak_state_floats']} floats peak)"
                )
        elif args.command == "synth":
            path = write_synthetic_stream(config, out_dir=args.out)
            print(f"wrote {path}")
        elif args.command == "regret":
            for name in config.algorithms:
                trace, path = emit_regret_report(
                    config, name, out_dir=args.out, render_figures=not args.no_figures
                )
                print(f"{name}: regret(T) = {trace.final_regret:.6g} -> {path}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surfaced with a stable exit code
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
