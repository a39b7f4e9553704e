"""Command line entry point.

    pdla exp1|exp2|exp3 [--config PATH] [--seed N] [--out DIR] [--svg] [--dataset csv|bundled|synth]
    pdla mapca --y Y.csv --yhat YHAT.csv --tol T

Exit status: 0 on success, 1 on validation errors, 2 on I/O errors.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import harness
from .classifier import mapca

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdla", description="Deviant-learning pipeline classification experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for n in (1, 2, 3):
        p = sub.add_parser(f"exp{n}", help=f"run experiment {n}")
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory (default: runs)")
        p.add_argument("--svg", action="store_true", default=None, help="also write SVG trend charts")
        p.add_argument("--dataset", help="'bundled', 'synth', or a path to a label-first CSV file")
        p.set_defaults(experiment=n)
    m = sub.add_parser("mapca", help="score two numeric CSV matrices")
    m.add_argument("--y", required=True)
    m.add_argument("--yhat", required=True)
    m.add_argument("--tol", type=float, required=True)
    return parser


def _read_matrix(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)


def _run_experiment(args) -> None:
    cfg = harness.load_config(args.config, experiment=args.experiment, seed=args.seed,
                              out=args.out, svg=args.svg, dataset=args.dataset)
    result = harness.run(cfg)
    outdir = f"{cfg.out}/exp{cfg.experiment}"
    if cfg.experiment == 1:
        print(result.text(), end="")
    else:
        report, _ = result
        print(report.table(), end="")
    print(f"outputs written to {outdir} (config {cfg.config_hash()[:12]})")


def _run_mapca(args) -> None:
    report = mapca(_read_matrix(args.y), _read_matrix(args.yhat), args.tol)
    print(f"hits={report.hits} n_z={report.n_z} tol={report.tol} accuracy={report.accuracy_percent:.4f}%")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "mapca":
            _run_mapca(args)
        else:
            _run_experiment(args)
    except OSError as exc:
        print(f"pdla: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, LookupError) as exc:
        print(f"pdla: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
