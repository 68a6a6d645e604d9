"""Command-line front end: ``deteq run | validate | figure``.

Exit status is 0 on success, 2 for an invalid experiment file (every
problem is listed on stderr) and 3 when a solver fails to converge.
"""

import argparse
import sys

from . import experiments
from .errors import NonConvergence
from .experiments import ExperimentError, SpecError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NONCONVERGENCE = 3


def _common(p):
    p.add_argument("--units", choices=("nats", "bits"), default=None, help="override the file's units")
    p.add_argument("--tol", type=float, default=1e-12, help="fixed-point tolerance (default 1e-12)")
    p.add_argument("--max-iter", type=int, default=None, help="fixed-point iteration cap")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="deteq",
        description="Deterministic equivalents for relay and double-scattering MIMO channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate an experiment file and write its table")
    p.add_argument("spec", help="experiment JSON file")
    p.add_argument("--out", default=None, help="output path (overrides output.path)")
    _common(p)

    p = sub.add_parser("validate", help="check an experiment file without running it")
    p.add_argument("spec", help="experiment JSON file")
    _common(p)

    p = sub.add_parser("figure", help="regenerate the data behind fig2, fig3 or fig4")
    p.add_argument("which", choices=experiments.FIGURES)
    p.add_argument("--trials", type=int, default=10_000, help="Monte Carlo trials per point (0 to skip)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default=".", help="output directory")
    _common(p)
    return parser


def _report(problems, stream):
    for line in problems:
        print("error: %s" % line, file=stream)


def _load(path):
    return experiments.parse_spec(experiments.load_spec(path))


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            spec = _load(args.spec)
            print("%s: ok (%s model, %d grid points)" % (args.spec, spec.model, len(spec.grid)), file=stdout)
            return EXIT_OK
        if args.command == "run":
            spec = _load(args.spec)
            table = experiments.run(spec, tol=args.tol, max_iter=args.max_iter, units=args.units)
            path = args.out or spec.output_path
            fmt = spec.output_format
            if path is None:
                text = experiments.table_csv(table) if fmt == "csv" else experiments.table_json(table)
                stdout.write(text)
            else:
                experiments.write_table(table, path, fmt)
                print("wrote %s" % path, file=stdout)
            return EXIT_OK
        if args.trials and args.trials < 2:
            _report(["--trials: need 0 (no Monte Carlo) or at least 2"], stderr)
            return EXIT_INVALID
        paths = experiments.reproduce_figure(
            args.which,
            trials=args.trials,
            seed=args.seed,
            out=args.out,
            units=args.units or "nats",
            tol=args.tol,
            max_iter=args.max_iter,
        )
        for path in paths:
            print("wrote %s" % path, file=stdout)
        return EXIT_OK
    except SpecError as exc:
        _report(exc.problems, stderr)
        return EXIT_INVALID
    except (ExperimentError, NonConvergence) as exc:
        print("error: no convergence: %s" % exc, file=stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
