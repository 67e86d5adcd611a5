"""``rflab`` command line.

Each subcommand runs one experiment (or the self test) and prints a single
line of ``key=value`` pairs. Exit status is 0 on success, 1 on a
computation error and 2 on a usage or configuration error.
"""

import argparse
import sys

import numpy as np

from . import _parallel
from .errors import ConfigError, InsufficientRows, ParseError, RFLabError
from .experiments import EXPERIMENTS, load_config, make_config, run_experiment, summarize
from .selftest import run_selftest


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse exits with 2 as well; keep the usage text
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser():
    parser = _Parser(prog="rflab", description="Random-feature ensemble experiments.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI-style experiment config")
    common.add_argument("--seed", type=_u64, metavar="U64", help="overrides the config seed")
    common.add_argument("--out", metavar="PATH", help="CSV output path")
    common.add_argument("--threads", type=_positive, metavar="N",
                        help="worker threads (default: RFLAB_THREADS or CPU count)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
    sub.add_parser("selftest", parents=[common], help="fast invariant checks")
    return parser


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v).replace(" ", "_")


def format_summary(record):
    return " ".join(f"{k}={_fmt(v)}" for k, v in record.items())


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        _parallel.set_threads(args.threads)
    if args.command == "selftest":
        passed, failures = run_selftest()
        print(format_summary({"selftest": "pass" if not failures else "fail",
                              "passed": passed, "failed": len(failures)}))
        for f in failures:
            print(f, file=sys.stderr)
        return 0 if not failures else 1
    try:
        if args.config:
            cfg = load_config(args.config, experiment=args.command, seed=args.seed, out=args.out)
        else:
            cfg = make_config(args.command, seed=args.seed, out=args.out)
        table = run_experiment(cfg)
        summary = summarize(table)
    except (ConfigError, ParseError, InsufficientRows) as exc:
        print(f"rflab: input error: {exc}", file=sys.stderr)
        return 2
    except (RFLabError, np.linalg.LinAlgError, ArithmeticError, ValueError) as exc:
        print(f"rflab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"rflab: {exc}", file=sys.stderr)
        return 1
    if cfg.out:
        summary["out"] = cfg.out
    print(format_summary(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
