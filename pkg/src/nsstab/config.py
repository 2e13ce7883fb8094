"""Run configuration: a flat key = value grammar with four sections.

    [problem]
    name = taylor_green | manufactured | lid_driven_cavity | kelvin_helmholtz
    nu = 0.001              # viscosity (taylor_green; others fix their own)
    re = 100.0              # Reynolds number (lid_driven_cavity)
    kh_time_units = 50      # horizon in shear time units (kelvin_helmholtz)
    lx = 1.0                # domain lengths; built-in problems require 1.0
    ly = 1.0

    [grid]
    nx = 100
    ny = 100

    [scheme]
    kind = cn1 | cn2 | bdf1 | bdf2 | vcn2 | vbdf2
    tau = 0.01              # fixed step size  (exclusive with the controller)
    tau_max = 0.1           # controller bounds and gain (vcn2/vbdf2)
    tau_min = 0.008333333333333333
    eta = 4e5
    t_final = 20.0          # horizon            (exclusive with steady_tol)
    steady_tol = 1e-6       # steady-state stop on max|U^n - U^{n-1}|
    max_steps = 1000000     # safety cap for steady-state runs
    eps_den = ...           # optional tolerance overrides
    eps_det = ...

    [output]
    dir = runs/tg
    snapshot_stride = 0     # every k steps, plus t=0 and the final state;
                            # 0 disables stride snapshots
    snapshot_times = 0.5, 1.0

Unknown sections or keys are rejected.  Exactly one of {tau, controller} and
exactly one of {t_final, steady_tol} must be configured (problem defaults
fill t_final when present).
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError
from . import problems as problems_mod
from .schemes import SCHEMES, VBDF2, VCN2

_KNOWN = {
    "problem": {"name", "nu", "re", "kh_time_units", "lx", "ly"},
    "grid": {"nx", "ny"},
    "scheme": {
        "kind",
        "tau",
        "tau_max",
        "tau_min",
        "eta",
        "t_final",
        "steady_tol",
        "max_steps",
        "eps_den",
        "eps_det",
    },
    "output": {"dir", "snapshot_stride", "snapshot_times"},
}

VARIABLE_SCHEMES = (VCN2, VBDF2)


@dataclass
class RunConfig:
    problem_name: str
    problem_kwargs: dict
    lx: float
    ly: float
    nx: int
    ny: int
    scheme: str
    tau: Optional[float]              # fixed step size, or None with a controller
    tau_max: Optional[float]
    tau_min: Optional[float]
    eta: Optional[float]
    t_final: Optional[float]          # horizon, or None with steady_tol
    steady_tol: Optional[float]
    max_steps: int
    out_dir: str
    snapshot_stride: int
    snapshot_times: tuple
    eps_den: Optional[float] = None
    eps_det: Optional[float] = None
    overrides: dict = field(default_factory=dict)  # flag-level changes, for the manifest

    @property
    def adaptive(self):
        return self.tau is None

    def make_problem(self):
        return problems_mod.by_name(self.problem_name, **self.problem_kwargs)


def _get_float(sec, key, line_info):
    raw = sec[key]
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {raw!r} as a number") from None


def _get_int(sec, key):
    raw = sec[key]
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {raw!r} as an integer") from None


def parse_config(text):
    """Parse and validate a run configuration document."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(
                f"unknown section [{section}]; expected one of {sorted(_KNOWN)}"
            )
        for key in cp[section]:
            if key not in _KNOWN[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    if "problem" not in cp or "name" not in cp["problem"]:
        raise ConfigError("missing [problem] name")
    prob_sec = cp["problem"]
    name = prob_sec["name"].strip()
    kwargs = {}
    if name == "taylor_green" and "nu" in prob_sec:
        kwargs["nu"] = _get_float(prob_sec, "nu", None)
    elif name == "lid_driven_cavity":
        if "re" not in prob_sec:
            raise ConfigError("lid_driven_cavity needs re = <Reynolds number>")
        kwargs["Re"] = _get_float(prob_sec, "re", None)
    elif name == "kelvin_helmholtz" and "kh_time_units" in prob_sec:
        kwargs["T_units"] = _get_float(prob_sec, "kh_time_units", None)
    elif name not in ("taylor_green", "manufactured", "kelvin_helmholtz"):
        raise ConfigError(f"unknown problem name {name!r}")
    if "nu" in prob_sec and name not in ("taylor_green",):
        raise ConfigError(f"problem {name!r} fixes its own viscosity; drop the nu key")
    lx = _get_float(prob_sec, "lx", None) if "lx" in prob_sec else 1.0
    ly = _get_float(prob_sec, "ly", None) if "ly" in prob_sec else 1.0
    if (lx, ly) != (1.0, 1.0):
        raise ConfigError("built-in problems are posed on the unit square (lx = ly = 1)")

    if "grid" not in cp or "nx" not in cp["grid"] or "ny" not in cp["grid"]:
        raise ConfigError("missing [grid] nx/ny")
    nx = _get_int(cp["grid"], "nx")
    ny = _get_int(cp["grid"], "ny")

    if "scheme" not in cp or "kind" not in cp["scheme"]:
        raise ConfigError("missing [scheme] kind")
    sch = cp["scheme"]
    kind = sch["kind"].strip().lower()
    if kind not in SCHEMES:
        raise ConfigError(f"unknown scheme kind {kind!r}; expected one of {SCHEMES}")

    has_tau = "tau" in sch
    ctrl_keys = [k for k in ("tau_max", "tau_min", "eta") if k in sch]
    if has_tau and ctrl_keys:
        raise ConfigError(
            f"configure either a fixed step (tau) or a controller "
            f"({', '.join(ctrl_keys)}), not both"
        )
    if not has_tau and len(ctrl_keys) != 3:
        missing = {"tau_max", "tau_min", "eta"} - set(ctrl_keys)
        if ctrl_keys:
            raise ConfigError(f"incomplete controller: missing {sorted(missing)}")
        raise ConfigError("missing step-size policy: set tau or tau_max/tau_min/eta")
    if kind in VARIABLE_SCHEMES and has_tau:
        raise ConfigError(f"{kind} is a variable-step scheme; configure the controller")
    if kind not in VARIABLE_SCHEMES and not has_tau:
        raise ConfigError(f"{kind} is a fixed-step scheme; configure tau")

    tau = _get_float(sch, "tau", None) if has_tau else None
    tau_max = _get_float(sch, "tau_max", None) if "tau_max" in sch else None
    tau_min = _get_float(sch, "tau_min", None) if "tau_min" in sch else None
    eta = _get_float(sch, "eta", None) if "eta" in sch else None
    if tau is not None and tau <= 0:
        raise ConfigError(f"tau must be positive, got {tau}")

    has_T = "t_final" in sch
    has_steady = "steady_tol" in sch
    if has_T and has_steady:
        raise ConfigError("configure either t_final or steady_tol, not both")
    t_final = _get_float(sch, "t_final", None) if has_T else None
    steady_tol = _get_float(sch, "steady_tol", None) if has_steady else None
    max_steps = _get_int(sch, "max_steps") if "max_steps" in sch else 1_000_000

    out = cp["output"] if "output" in cp else {}
    out_dir = out["dir"].strip() if "dir" in out else "nsstab-out"
    stride = int(out["snapshot_stride"]) if "snapshot_stride" in out else 0
    if stride < 0:
        raise ConfigError(f"snapshot_stride must be nonnegative, got {stride}")
    times = ()
    if "snapshot_times" in out:
        try:
            times = tuple(float(s) for s in out["snapshot_times"].split(",") if s.strip())
        except ValueError:
            raise ConfigError(
                f"snapshot_times: cannot parse {out['snapshot_times']!r} as a comma list"
            ) from None

    eps_den = _get_float(sch, "eps_den", None) if "eps_den" in sch else None
    eps_det = _get_float(sch, "eps_det", None) if "eps_det" in sch else None

    cfg = RunConfig(
        problem_name=name,
        problem_kwargs=kwargs,
        lx=lx,
        ly=ly,
        nx=nx,
        ny=ny,
        scheme=kind,
        tau=tau,
        tau_max=tau_max,
        tau_min=tau_min,
        eta=eta,
        t_final=t_final,
        steady_tol=steady_tol,
        max_steps=max_steps,
        out_dir=out_dir,
        snapshot_stride=stride,
        snapshot_times=times,
        eps_den=eps_den,
        eps_det=eps_det,
    )
    _validate_semantics(cfg)
    return cfg


def _validate_semantics(cfg):
    if cfg.nx < 3 or cfg.ny < 3:
        raise ConfigError(f"grid must be at least 3x3, got {cfg.nx}x{cfg.ny}")
    problem = cfg.make_problem()
    if cfg.t_final is None and cfg.steady_tol is None:
        if problem.T_final is None:
            raise ConfigError(
                f"problem {cfg.problem_name!r} has no default horizon; "
                "set t_final or steady_tol"
            )
        cfg.t_final = problem.T_final
    if cfg.steady_tol is not None and cfg.steady_tol <= 0:
        raise ConfigError(f"steady_tol must be positive, got {cfg.steady_tol}")
    if cfg.adaptive and cfg.steady_tol is not None:
        raise ConfigError("steady-state stopping requires a fixed step size")


def parse_config_file(path):
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read())


def config_to_dict(cfg):
    """Manifest echo of a validated configuration."""
    return {
        "problem": {"name": cfg.problem_name, **cfg.problem_kwargs},
        "grid": {"nx": cfg.nx, "ny": cfg.ny, "lx": cfg.lx, "ly": cfg.ly},
        "scheme": {
            "kind": cfg.scheme,
            "tau": cfg.tau,
            "tau_max": cfg.tau_max,
            "tau_min": cfg.tau_min,
            "eta": cfg.eta,
            "t_final": cfg.t_final,
            "steady_tol": cfg.steady_tol,
            "max_steps": cfg.max_steps,
            "eps_den": cfg.eps_den,
            "eps_det": cfg.eps_det,
        },
        "output": {
            "dir": cfg.out_dir,
            "snapshot_stride": cfg.snapshot_stride,
            "snapshot_times": list(cfg.snapshot_times),
        },
        "overrides": dict(cfg.overrides),
    }
