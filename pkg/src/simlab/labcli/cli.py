"""Command-line entry point.

Exit codes: 0 on success, 1 when a verdict fails, 2 on configuration,
parse or output errors.
"""
import argparse
import sys
from pathlib import Path

from .. import __version__
from ..errors import BadParams, ConfigError, IoError, ParseError, SimlabError, UnknownSuite
from .config import KINDS, load_config, loads_config
from .runner import run_experiment
from .suites import SUITES, verify_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _u64(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="simlab", description=(
        "Similarity-to-contraction experiments on matrices and matrix semigroups."))
    parser.add_argument("--version", action="version", version=f"simlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", type=Path, help="experiment config file")
        p.add_argument("--input", action="append", dest="inputs", metavar="SPEC",
                       help="input such as diag:0.5 or model:foguel N=9 (repeatable; "
                            "replaces the config's inputs)")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--seed", type=_u64, help="random seed")
        p.add_argument("--kappa-max", type=float, help="condition-number budget")
        p.add_argument("--tol", type=float, help="relative tolerance")
        p.add_argument("--force", action="store_true", help="overwrite existing reports")
        p.add_argument("--quiet", action="store_true", help="do not echo the CSV")
    p = sub.add_parser("verify", help="run an invariant suite")
    p.add_argument("suite", help=f"one of {', '.join(SUITES)}")
    return parser


def _experiment(args):
    overrides = {"kind": args.command, "seed": args.seed, "output_dir": args.out,
                 "kappa_max": args.kappa_max, "tol": args.tol, "inputs": args.inputs}
    if args.config is not None:
        cfg = load_config(args.config, overrides)
    else:
        if overrides["seed"] is None:
            overrides["seed"] = 0
        cfg = loads_config("", Path("."), overrides)
    rep = run_experiment(cfg, write=True, force=args.force)
    if not args.quiet:
        sys.stdout.write(rep.to_csv())
    return EXIT_OK if rep.passed else EXIT_FAIL


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            summary = verify_suite(args.suite)
            for line in summary.lines():
                print(line)
            return EXIT_OK if summary.passed else EXIT_FAIL
        return _experiment(args)
    except (ConfigError, ParseError, BadParams, IoError, UnknownSuite) as exc:
        print(f"simlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimlabError as exc:
        # invalid data reaching a numerical routine is still a user input problem
        if not isinstance(exc, ValueError):
            raise
        print(f"simlab: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
