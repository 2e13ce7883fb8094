"""Figure CLI: one subcommand per figure kind.

  nsstab-fig energy      run1/timeseries.csv [more...] -o energy.png [--nu 0.001]
  nsstab-fig tau         run1/timeseries.csv [more...] -o tau.png
  nsstab-fig convergence convergence.csv -o conv.png [--column u_linf]
  nsstab-fig centerline  snap.dat -o centerline.png
  nsstab-fig vorticity   snap1.dat snap2.dat [...] -o vort.png [--ncols 2]
"""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .plots import plot_centerline, plot_convergence, plot_energy, plot_tau, plot_vorticity


def build_parser():
    ap = argparse.ArgumentParser(prog="nsstab-fig", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="kind", required=True)

    p = sub.add_parser("energy")
    p.add_argument("timeseries", nargs="+")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--nu", type=float, help="draw the exact Taylor-Green energy reference")

    p = sub.add_parser("tau")
    p.add_argument("timeseries", nargs="+")
    p.add_argument("-o", "--out", required=True)

    p = sub.add_parser("convergence")
    p.add_argument("table")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--column", default="u_linf")

    p = sub.add_parser("centerline")
    p.add_argument("snapshot")
    p.add_argument("-o", "--out", required=True)

    p = sub.add_parser("vorticity")
    p.add_argument("snapshots", nargs="+")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--ncols", type=int, default=2)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "energy":
            plot_energy(args.timeseries, args.out, nu=args.nu)
        elif args.kind == "tau":
            plot_tau(args.timeseries, args.out)
        elif args.kind == "convergence":
            _, slopes = plot_convergence(args.table, args.out, column=args.column)
            for scheme, slope in slopes.items():
                print(f"{scheme}: endpoint slope {slope:.3f}")
        elif args.kind == "centerline":
            plot_centerline(args.snapshot, args.out)
        else:
            plot_vorticity(args.snapshots, args.out, ncols=args.ncols)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
