"""Command-line surface.

  nsstab run <config> [overrides]        execute one configured simulation
  nsstab converge <config> --taus ...    step-size sweep + convergence table
  nsstab properties                      operator/identity property table
  nsstab cavity --re <Re> [overrides]    lid-driven cavity preset
  nsstab kh [--full-paper] [overrides]   Kelvin-Helmholtz preset

Exit codes: 0 success, 2 configuration error, 3 solver error.  Flag
overrides take precedence over config values and are recorded in the run
manifest.  NSSTAB_THREADS bounds converge-sweep parallelism.
"""

from __future__ import annotations

import argparse
import sys

from .config import parse_config, parse_config_file
from .errors import ConfigError, SolverError, ValidationError
from .properties import run_all
from .runner import convergence_study, run_simulation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _add_override_flags(p):
    p.add_argument("--out", help="output directory (overrides [output] dir)")
    p.add_argument("--tau", type=float, help="fixed step size override")
    p.add_argument("--t-final", type=float, dest="t_final", help="horizon override")
    p.add_argument("--nx", type=int, help="grid cells in x")
    p.add_argument("--ny", type=int, help="grid cells in y")
    p.add_argument("--scheme", help="scheme kind override")
    p.add_argument("--max-steps", type=int, dest="max_steps", help="step-count cap")


def _apply_overrides(cfg, args):
    pairs = (
        ("out", "out_dir"),
        ("tau", "tau"),
        ("t_final", "t_final"),
        ("nx", "nx"),
        ("ny", "ny"),
        ("scheme", "scheme"),
        ("max_steps", "max_steps"),
    )
    for flag, attr in pairs:
        val = getattr(args, flag, None)
        if val is None:
            continue
        cfg.overrides[attr] = {"from": getattr(cfg, attr), "to": val}
        setattr(cfg, attr, val)
    if cfg.overrides:
        # overrides must respect the same exclusivity rules as the config
        if cfg.tau is not None and cfg.scheme in ("vcn2", "vbdf2"):
            raise ConfigError(f"{cfg.scheme} is a variable-step scheme; --tau conflicts")
        if "t_final" in cfg.overrides:
            cfg.steady_tol = None
    return cfg


def _print_run_summary(art):
    print(f"run: {art.status}")
    print(f"  steps        {art.steps}")
    print(f"  t_final      {art.t_final:.6g}")
    print(f"  energy       {art.energy_final:.12g}")
    print(f"  min |det A|  {art.min_det_A:.6g}")
    print(f"  max div_inf  {art.max_div_inf:.3e}")
    print(f"  wall clock   {art.wall_clock:.2f} s")
    print(f"  outputs      {art.out_dir}")


def cmd_run(args):
    cfg = parse_config_file(args.config)
    cfg = _apply_overrides(cfg, args)
    art = run_simulation(cfg)
    _print_run_summary(art)
    return EXIT_OK


def cmd_converge(args):
    cfg = parse_config_file(args.config)
    cfg = _apply_overrides(cfg, args)
    taus = [float(s) for s in args.taus.split(",") if s.strip()]
    rows, path = convergence_study(cfg, taus)
    print(f"convergence table: {path}")
    print(f"{'tau':>12} {'u_linf':>12} {'p_linf':>12} {'order_u':>8} {'order_p':>8}")
    for row in rows:
        ou = f"{row['order_u']:.3f}" if row["order_u"] != "" else "-"
        op = f"{row['order_p']:.3f}" if row["order_p"] != "" else "-"
        print(
            f"{row['tau']:12.6g} {row['u_linf']:12.4e} {row['p_linf']:12.4e} {ou:>8} {op:>8}"
        )
    return EXIT_OK


def cmd_properties(args):
    results = run_all(trials=args.trials)
    width = max(len(name) for name, *_ in results)
    ok = True
    for name, worst, bound, passed in results:
        ok &= passed
        print(f"{name:<{width}}  {worst:.3e}  (bound {bound:.0e})  {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if ok else EXIT_SOLVER


CAVITY_TEMPLATE = """
[problem]
name = lid_driven_cavity
re = {re}

[grid]
nx = {n}
ny = {n}

[scheme]
kind = cn2
tau = 1e-3
steady_tol = 1e-6

[output]
dir = {out}
snapshot_stride = 0
"""

KH_TEMPLATE = """
[problem]
name = kelvin_helmholtz
kh_time_units = {units}

[grid]
nx = {n}
ny = {n}

[scheme]
kind = cn2
tau = {tau}

[output]
dir = {out}
snapshot_stride = {stride}
"""


def cmd_cavity(args):
    text = CAVITY_TEMPLATE.format(re=args.re, n=args.n, out=args.out or f"cavity_re{args.re:g}")
    cfg = _apply_overrides(parse_config(text), args)
    art = run_simulation(cfg)
    _print_run_summary(art)
    return EXIT_OK


def cmd_kh(args):
    if args.full_paper:
        n, units, tau = 256, 200.0, 1.0 / 600.0
    else:
        n, units, tau = 128, 50.0, 1.0 / 600.0
    stride = args.snapshot_stride
    text = KH_TEMPLATE.format(
        units=units, n=n, tau=tau, out=args.out or "kh", stride=stride
    )
    cfg = _apply_overrides(parse_config(text), args)
    art = run_simulation(cfg)
    _print_run_summary(art)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="nsstab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one configured simulation")
    p.add_argument("config")
    _add_override_flags(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("converge", help="temporal-convergence sweep")
    p.add_argument("config")
    p.add_argument("--taus", required=True, help="comma list of decreasing step sizes")
    _add_override_flags(p)
    p.set_defaults(fn=cmd_converge)

    p = sub.add_parser("properties", help="operator/identity property table")
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(fn=cmd_properties)

    p = sub.add_parser("cavity", help="lid-driven cavity preset")
    p.add_argument("--re", type=float, required=True)
    p.add_argument("--n", type=int, default=64, help="cells per side")
    _add_override_flags(p)
    p.set_defaults(fn=cmd_cavity)

    p = sub.add_parser("kh", help="Kelvin-Helmholtz preset (desk scale by default)")
    p.add_argument("--full-paper", action="store_true", dest="full_paper")
    p.add_argument("--snapshot-stride", type=int, default=120, dest="snapshot_stride")
    _add_override_flags(p)
    p.set_defaults(fn=cmd_kh)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
