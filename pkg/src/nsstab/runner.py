"""Simulation orchestration and deterministic on-disk outputs.

A run writes into its output directory:

  timeseries.csv   one row per completed step with the energy bookkeeping
                   (17-significant-digit decimals; byte-identical across
                   repeated runs of one config on one platform)
  manifest.json    config echo, solver version, tolerances, wall clock,
                   step count, min |det A|, max divergence, status
  snap_*.dat       field snapshots in the plain-text "nsstab-field v1" format

Snapshot format: two header lines

  # nsstab-field v1
  # nx <Nx> ny <Ny> hx <hx> hy <hy> t <t>

then three blocks, each introduced by a bare label line (u, v, p) and
followed by Nx rows of Ny values (row index = x index).  %.17g formatting
round-trips IEEE doubles bit-exactly.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .adaptive import PlanCache, StepController, next_tau, step_variable
from .config import config_to_dict
from .diagnostics import EnergyRecord, error_norms, kinetic_energy
from .errors import SolverError, ValidationError
from .grid import PressureField, VelocityField, build_grid, field_linf
from .operators import DEFAULT_EPS_DEN_COEFF
from .schemes import CN_FAMILY, init_state, mass_coefficient, step
from .stokes import plan_solver

SNAPSHOT_MAGIC = "# nsstab-field v1"
TIMESERIES_HEADER = "n,t,tau,E,E_hat,dissipation,identity_residual,div_inf,det_A"
CONVERGENCE_HEADER = "scheme,tau,u_linf,u_l2,p_linf,p_l2,order_u,order_p"


def _fmt(x):
    return f"{x:.17g}"


def write_snapshot(U, P, grid, t, path):
    """Write one (u, v, p) snapshot; see the module docstring for the format."""
    lines = [
        SNAPSHOT_MAGIC,
        f"# nx {grid.Nx} ny {grid.Ny} hx {_fmt(grid.hx)} hy {_fmt(grid.hy)} t {_fmt(t)}",
    ]
    for label, arr in (("u", U.u), ("v", U.v), ("p", P.p)):
        lines.append(label)
        for a in range(grid.Nx):
            lines.append(" ".join(_fmt(x) for x in arr[a]))
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise SolverError(f"failed to write snapshot {path}: {exc}") from exc
    return path


def read_snapshot(path):
    """Read a v1 snapshot; returns (U, P, meta dict with nx ny hx hy t)."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.rstrip("\n") for ln in f]
    if not lines or lines[0] != SNAPSHOT_MAGIC:
        raise ValidationError(f"{path}: not a nsstab-field v1 snapshot")
    head = lines[1].split()
    if len(head) != 11 or head[0] != "#" or head[1::2] != ["nx", "ny", "hx", "hy", "t"]:
        raise ValidationError(f"{path}: malformed snapshot header {lines[1]!r}")
    meta = {
        "nx": int(head[2]),
        "ny": int(head[4]),
        "hx": float(head[6]),
        "hy": float(head[8]),
        "t": float(head[10]),
    }
    nx, ny = meta["nx"], meta["ny"]
    blocks = {}
    i = 2
    for _ in range(3):
        if i >= len(lines) or lines[i] not in ("u", "v", "p"):
            raise ValidationError(f"{path}: expected a block label at line {i + 1}")
        label = lines[i]
        i += 1
        rows = lines[i : i + nx]
        if len(rows) != nx:
            raise ValidationError(f"{path}: block {label!r} is truncated")
        arr = np.array([[float(x) for x in row.split()] for row in rows])
        if arr.shape != (nx, ny):
            raise ValidationError(
                f"{path}: block {label!r} has shape {arr.shape}, expected {(nx, ny)}"
            )
        blocks[label] = arr
        i += nx
    missing = {"u", "v", "p"} - set(blocks)
    if missing:
        raise ValidationError(f"{path}: missing blocks {sorted(missing)}")
    return VelocityField(blocks["u"], blocks["v"]), PressureField(blocks["p"]), meta


def energy_record(state):
    """EnergyRecord of the step that produced this state."""
    d = state.diag
    return EnergyRecord(
        t=state.t,
        E=d.energy,
        E_hat=d.e_hat,
        dissipation=d.dissipation,
        identity_residual=d.identity_residual,
        div_inf=d.div_inf,
        tau=d.tau,
        det_A=d.det_A,
    )


def _timeseries_row(n, rec):
    e_hat = "" if rec.E_hat is None else _fmt(rec.E_hat)
    return (
        f"{n},{_fmt(rec.t)},{_fmt(rec.tau)},{_fmt(rec.E)},{e_hat},"
        f"{_fmt(rec.dissipation)},{_fmt(rec.identity_residual)},"
        f"{_fmt(rec.div_inf)},{_fmt(rec.det_A)}"
    )


@dataclass
class RunArtifacts:
    out_dir: str
    timeseries_path: str
    manifest_path: str
    snapshot_paths: list
    steps: int
    t_final: float
    energy_final: float
    min_det_A: float
    max_div_inf: float
    wall_clock: float
    status: str


def _step_count_plan(t_final, tau):
    """Number of uniform steps, clamping the last one onto the horizon."""
    n = round(t_final / tau)
    if abs(n * tau - t_final) <= 1e-9 * max(1.0, t_final) and n >= 1:
        return n, None
    n = int(np.ceil(t_final / tau - 1e-12))
    return n, t_final  # final step shortened to land on t_final


def run_simulation(config, quiet=True):
    """Execute one configured run, writing its artifacts; returns RunArtifacts."""
    problem = config.make_problem()
    grid = build_grid(config.lx, config.ly, config.nx, config.ny, problem.bc)

    os.makedirs(config.out_dir, exist_ok=True)
    ts_path = os.path.join(config.out_dir, "timeseries.csv")
    mf_path = os.path.join(config.out_dir, "manifest.json")

    eps_den = (
        DEFAULT_EPS_DEN_COEFF * grid.Lx * grid.Ly if config.eps_den is None else config.eps_den
    )
    manifest = {
        "version": __version__,
        "config": config_to_dict(config),
        "tolerances": {"eps_den": eps_den, "eps_det": config.eps_det},
        "status": "RUNNING",
    }

    rows = []
    snap_paths = []
    pending_times = sorted(config.snapshot_times)
    t0 = time.time()
    min_det = np.inf
    max_div = 0.0
    failure = None

    snapshots_on = config.snapshot_stride > 0 or bool(config.snapshot_times)
    last_snap_n = -1

    def take_snapshot(state):
        nonlocal last_snap_n
        if state.n == last_snap_n:
            return
        path = os.path.join(config.out_dir, f"snap_{state.n:08d}.dat")
        write_snapshot(state.Un, state.Pn, grid, state.t, path)
        snap_paths.append(path)
        last_snap_n = state.n

    def want_snapshot(state):
        nonlocal pending_times
        due = config.snapshot_stride > 0 and state.n % config.snapshot_stride == 0
        while pending_times and state.t >= pending_times[0] - 1e-12:
            pending_times = pending_times[1:]
            due = True
        return due

    state = None
    try:
        tau0 = config.tau if config.tau is not None else config.tau_min
        state = init_state(problem, grid, config.scheme, tau0)
        if snapshots_on:
            # the initial condition, before any step (pressure not yet computed)
            U0 = state.Un if state.n == 0 else state.Unm1
            path = os.path.join(config.out_dir, "snap_00000000.dat")
            write_snapshot(U0, PressureField(np.zeros(grid.shape)), grid, 0.0, path)
            snap_paths.append(path)
            last_snap_n = 0
        if state.diag is not None:  # startup step of a second-order scheme
            rows.append(_timeseries_row(state.n, energy_record(state)))
            min_det = min(min_det, abs(state.diag.det_A))
            max_div = max(max_div, state.diag.div_inf)

        if config.adaptive:
            ctrl = StepController(config.tau_max, config.tau_min, config.eta)
            cache = PlanCache(grid, problem.nu, config.scheme)
            e_prev = kinetic_energy(state.Unm1, grid)
            e_curr = state.diag.energy
            t_final = config.t_final
            while state.t < t_final - 1e-12 and state.n < config.max_steps:
                tau = next_tau(e_curr, e_prev, state.tau_n, ctrl)
                tau = min(tau, t_final - state.t)
                state = step_variable(
                    state, tau, cache, forcing=problem.forcing, eps_det=config.eps_det
                )
                e_prev, e_curr = e_curr, state.diag.energy
                rows.append(_timeseries_row(state.n, energy_record(state)))
                min_det = min(min_det, abs(state.diag.det_A))
                max_div = max(max_div, state.diag.div_inf)
                if want_snapshot(state):
                    take_snapshot(state)
        else:
            tau = config.tau
            plan = plan_solver(grid, mass_coefficient(config.scheme, tau), problem.nu)
            if config.steady_tol is not None:
                diff = np.inf
                while diff > config.steady_tol and state.n < config.max_steps:
                    prev = state.Un
                    state = step(
                        state, plan, forcing=problem.forcing, tau=tau, eps_det=config.eps_det
                    )
                    diff = field_linf(state.Un - prev)
                    rows.append(_timeseries_row(state.n, energy_record(state)))
                    min_det = min(min_det, abs(state.diag.det_A))
                    max_div = max(max_div, state.diag.div_inf)
                    if want_snapshot(state):
                        take_snapshot(state)
                manifest["steady_diff"] = diff
                manifest["steady_reached"] = bool(diff <= config.steady_tol)
            else:
                n_total, clamp_T = _step_count_plan(config.t_final, tau)
                while state.n < n_total:
                    tau_k = tau
                    if clamp_T is not None and state.n == n_total - 1:
                        tau_k = clamp_T - state.t
                        plan_k = plan_solver(
                            grid, mass_coefficient(config.scheme, tau_k), problem.nu
                        )
                    else:
                        plan_k = plan
                    state = step(
                        state, plan_k, forcing=problem.forcing, tau=tau_k, eps_det=config.eps_det
                    )
                    rows.append(_timeseries_row(state.n, energy_record(state)))
                    min_det = min(min_det, abs(state.diag.det_A))
                    max_div = max(max_div, state.diag.div_inf)
                    if want_snapshot(state):
                        take_snapshot(state)
        if state is not None and snapshots_on:
            take_snapshot(state)  # final fields always included
    except SolverError as exc:
        failure = exc

    with open(ts_path, "w", encoding="utf-8") as f:
        f.write(TIMESERIES_HEADER + "\n")
        f.write("\n".join(rows))
        if rows:
            f.write("\n")

    wall = time.time() - t0
    manifest["wall_clock_s"] = wall
    manifest["steps"] = state.n if state is not None else 0
    manifest["t_final"] = state.t if state is not None else 0.0
    manifest["min_det_A"] = None if not np.isfinite(min_det) else min_det
    manifest["max_div_inf"] = max_div
    if state is not None:
        manifest["energy_final"] = kinetic_energy(state.Un, grid)
    if problem.exact is not None and state is not None and failure is None:
        p_time = state.t - 0.5 * state.tau_n if config.scheme in CN_FAMILY else state.t
        err = error_norms(state.Un, state.Pn, problem, state.t, grid, p_time=p_time)
        manifest["final_errors"] = {
            "u_linf": err.u_linf,
            "u_l2": err.u_l2,
            "p_linf": err.p_linf,
            "p_l2": err.p_l2,
        }
    if failure is not None:
        manifest["status"] = "FAILED"
        manifest["failure"] = {
            "step": (state.n + 1) if state is not None else 0,
            "error": str(failure),
        }
    else:
        manifest["status"] = "OK"
    with open(mf_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")

    if failure is not None:
        raise SolverError(
            f"run aborted at step {manifest['failure']['step']}: {failure}"
        ) from failure

    return RunArtifacts(
        out_dir=config.out_dir,
        timeseries_path=ts_path,
        manifest_path=mf_path,
        snapshot_paths=snap_paths,
        steps=manifest["steps"],
        t_final=manifest["t_final"],
        energy_final=manifest["energy_final"],
        min_det_A=manifest["min_det_A"],
        max_div_inf=max_div,
        wall_clock=wall,
        status=manifest["status"],
    )


def _sweep_member(config, tau, sub_dir):
    cfg = replace(config, tau=tau, out_dir=sub_dir, overrides=dict(config.overrides))
    problem = cfg.make_problem()
    if problem.exact is None:
        raise ValidationError(
            f"convergence study needs a problem with an exact solution, not {problem.name!r}"
        )
    art = run_simulation(cfg)
    with open(art.manifest_path, "r", encoding="utf-8") as f:
        manifest = json.load(f)
    return manifest["final_errors"]


def convergence_study(config, taus, out_path=None, workers=None):
    """Run a fixed-step config across a step-size sweep and tabulate errors.

    Returns the table as a list of dict rows and writes convergence.csv.
    Sweep members run in their own subdirectories; NSSTAB_THREADS (or
    `workers`) bounds the parallelism.
    """
    taus = list(taus)
    if not taus:
        raise ValidationError("empty step-size list")
    if any(t2 >= t1 for t1, t2 in zip(taus, taus[1:])):
        raise ValidationError("step sizes must be strictly decreasing")
    if workers is None:
        workers = int(os.environ.get("NSSTAB_THREADS", "1"))
    workers = max(1, workers)

    os.makedirs(config.out_dir, exist_ok=True)
    subs = [os.path.join(config.out_dir, f"tau_{tau:.12g}") for tau in taus]
    if workers == 1:
        errs = [_sweep_member(config, tau, sub) for tau, sub in zip(taus, subs)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errs = list(pool.map(lambda ts: _sweep_member(config, *ts), zip(taus, subs)))

    rows = []
    for i, (tau, e) in enumerate(zip(taus, errs)):
        row = {"scheme": config.scheme, "tau": tau, **e, "order_u": "", "order_p": ""}
        if i > 0:
            ratio = np.log(taus[i - 1] / tau)
            row["order_u"] = np.log(errs[i - 1]["u_linf"] / e["u_linf"]) / ratio
            row["order_p"] = np.log(errs[i - 1]["p_linf"] / e["p_linf"]) / ratio
        rows.append(row)

    if out_path is None:
        out_path = os.path.join(config.out_dir, "convergence.csv")
    with open(out_path, "w", encoding="utf-8") as f:
        f.write(CONVERGENCE_HEADER + "\n")
        for row in rows:
            f.write(
                ",".join(
                    [
                        row["scheme"],
                        _fmt(row["tau"]),
                        _fmt(row["u_linf"]),
                        _fmt(row["u_l2"]),
                        _fmt(row["p_linf"]),
                        _fmt(row["p_l2"]),
                        "" if row["order_u"] == "" else _fmt(row["order_u"]),
                        "" if row["order_p"] == "" else _fmt(row["order_p"]),
                    ]
                )
                + "\n"
            )
    return rows, out_path
