"""Command-line entry point.

Exit status: 0 on success, 1 when a phase fails or its inputs are missing,
2 for an invalid configuration. Every option can also be given as an
environment variable named ``TRACECARVE_<OPTION>``, for example
``TRACECARVE_FLAKY_RUNS=3``; an explicit flag wins over the environment.
"""
from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence

from tracecarve import pipeline
from tracecarve.errors import CarveError, ConfigInvalid

log = logging.getLogger("tracecarve")

SUBCOMMANDS = ("select-targets", "instrument", "generate", "assess", "report", "pipeline")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--subject", help="root of the project under analysis")
    common.add_argument("--out", help="output root shared by all phases")
    common.add_argument("--targets", help="target list, one method id per line")
    common.add_argument("--suite", help="test directory inside the subject (default: tests)")
    common.add_argument("--threshold-bytes", type=int, help="disk budget for recorded profiles")
    common.add_argument("--inline-threshold-bytes", type=int,
                        help="largest value embedded in a generated test")
    common.add_argument("--assert-mode", choices=("deep-serial", "native-eq"))
    common.add_argument("--flaky-runs", type=int, help="repeated runs per generated test")
    common.add_argument("--variant-timeout", type=float, help="seconds per mutation variant run")
    common.add_argument("--store", help="profile store (default: OUT/store)")
    common.add_argument("--workload", help="workload command run inside the instrumented tree; "
                        "{seed} is substituted")
    common.add_argument("--seed", type=int, help="seed passed to the default workload driver")
    common.add_argument("--jobs", type=int, help="parallel variant runs")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="tracecarve",
        description="Generate differential unit tests from recorded executions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "select-targets": "classify methods and list the pseudo-tested ones",
        "instrument": "write an instrumented copy of the subject",
        "generate": "build tests from the recorded profiles",
        "assess": "run generated tests and re-classify with them added",
        "report": "print the assessment table as CSV",
        "pipeline": "run every phase, including the workload",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _values(args: argparse.Namespace) -> dict[str, object]:
    names = (
        "subject", "out", "targets", "suite", "threshold_bytes", "inline_threshold_bytes",
        "assert_mode", "flaky_runs", "variant_timeout", "store", "workload", "seed", "jobs",
    )
    return {n: getattr(args, n) for n in names}


def run(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = pipeline.config_from(_values(args))
    except ConfigInvalid as exc:
        print(f"tracecarve: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "select-targets":
            targets = pipeline.select_targets(cfg)
            print(f"{len(targets)} targets written to {cfg.out / pipeline.TARGETS_FILE}")
        elif args.command == "instrument":
            root = pipeline.instrument(cfg)
            print(f"instrumented tree at {root}")
            print(f"run a workload there with TRACECARVE_STORE={cfg.store_root} to record profiles")
        elif args.command == "generate":
            result = pipeline.generate(cfg)
            print(f"{len(result.tests)} tests written to {cfg.out / pipeline.GENERATED_DIR}")
        elif args.command == "assess":
            report = pipeline.assess_phase(cfg)
            sys.stdout.write(report.to_csv())
        elif args.command == "report":
            sys.stdout.write(pipeline.load_report(cfg).to_csv())
        elif args.command == "pipeline":
            report = pipeline.run_pipeline(cfg)
            sys.stdout.write(report.to_csv())
    except ConfigInvalid as exc:
        print(f"tracecarve: configuration error: {exc}", file=sys.stderr)
        return 2
    except (CarveError, OSError) as exc:
        print(f"tracecarve: {args.command} failed: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
