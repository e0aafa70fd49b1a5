"""Command-line front end.

Subcommands mirror the harness runners: equilibrium, hydro, kpz,
burgers, kernel-audit, coupled.  Flags override config-file values.
Exit codes: 0 success, 2 configuration error, 3 runtime assertion
failure.  The WASEP_THREADS environment variable sets the default
worker count when --threads is not given.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import harness


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wasep",
        description="corner-growth simulation and verification harness")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in harness.KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} study")
        p.add_argument("--config", default=None,
                       help="key=value config file (flags override it)")
        p.add_argument("--seed", type=int, default=None, help="64-bit RNG seed")
        p.add_argument("--replicas", type=int, default=None,
                       help="number of independent replicas")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (default ${harness.THREADS_ENV_VAR} or 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    text = ""
    if args.config is not None:
        try:
            with open(args.config) as f:
                text = f.read()
        except OSError as e:
            print(f"config error: {e}", file=sys.stderr)
            return 2
    overrides = {
        "kind": args.kind,
        "seed": args.seed,
        "replicas": args.replicas,
        "out": args.out,
        "threads": args.threads,
    }
    try:
        config = harness.parse_config(text, overrides)
    except harness.ConfigError as e:
        for v in e.violations:
            print(f"config error: {v}", file=sys.stderr)
        return 2
    try:
        report = harness.RUNNERS[config.kind](config)
    except (AssertionError, ValueError, ArithmeticError) as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return 3
    summary = {k: v for k, v in report.items() if k != "config"}
    json.dump(summary, sys.stdout, indent=2, sort_keys=True,
              default=harness._jsonify)
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
