"""Command-line entry point.

``qmemsim run <scenario.yaml> [--out DIR] [--seed N] [--theory]`` executes a
scenario and writes CSV artifacts plus a run manifest; ``qmemsim check
<suite>`` runs a built-in verification suite and prints one pass/fail line
per criterion. Exit codes: 0 success, 1 configuration error, 2 runtime
failure, 3 check failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .checks import SUITES, run_suite
from .runners import run_scenario
from .scenario import ScenarioError, parse_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_CHECK = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmemsim",
        description="quantum-memristor chain simulator and verification suite",
    )
    parser.add_argument("--version", action="version", version=f"qmemsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario file")
    run_p.add_argument("scenario", help="path to the scenario YAML file")
    run_p.add_argument(
        "--out",
        default=None,
        help="output directory (default: $QMEMSIM_OUT or ./qmemsim_out)",
    )
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument(
        "--theory",
        action="store_true",
        help="also emit noise-free, latency-free companion curves",
    )
    run_p.add_argument(
        "--backend",
        choices=("python", "cython"),
        default=None,
        help="force a chain kernel backend",
    )

    check_p = sub.add_parser("check", help="run a built-in verification suite")
    check_p.add_argument(
        "suite",
        nargs="?",
        default="all",
        help=f"suite name ({', '.join(sorted(SUITES))})",
    )
    check_p.add_argument("--list", action="store_true", help="list available suites")
    check_p.add_argument(
        "--backend",
        choices=("python", "cython"),
        default=None,
        help="force a chain kernel backend",
    )
    return parser


def _cmd_run(args) -> int:
    try:
        scenario = parse_scenario(args.scenario)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = args.out or scenario.output_dir or os.environ.get("QMEMSIM_OUT") or "qmemsim_out"
    try:
        manifest = run_scenario(
            scenario, out_dir, seed=args.seed, theory=args.theory, backend=args.backend
        )
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(manifest.files)} files to {out_dir}")
    for name, rows in manifest.files:
        print(f"  {name} ({rows} rows)")
    return EXIT_OK


def _cmd_check(args) -> int:
    if args.list:
        for name in sorted(SUITES):
            print(name)
        return EXIT_OK
    try:
        results = run_suite(args.suite, backend=args.backend)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    for res in results:
        print(res.line())
    if all(r.passed for r in results):
        print(f"suite {args.suite!r}: {len(results)} checks passed")
        return EXIT_OK
    failed = sum(1 for r in results if not r.passed)
    print(f"suite {args.suite!r}: {failed} of {len(results)} checks FAILED", file=sys.stderr)
    return EXIT_CHECK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "check":
        return _cmd_check(args)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
