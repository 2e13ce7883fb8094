"""Fully discrete time integrators built on the three-solve decomposition.

One step of any scheme:

  1. extrapolate the convection state Ub
         cn1/bdf1:  Ub = U^n
         cn2:       Ub = (3 U^n - U^{n-1}) / 2
         bdf2:      Ub = 2 U^n - U^{n-1}
  2. form F(Ub) = Ub and G(Ub), then the three Stokes right-hand sides
         M1 = -G(Ub),   M2 = F(Ub),
         M3 = (2/tau) U^n + force           (cn, collocation t_n + tau/2)
         M3 = (1/tau) U^n + force           (bdf1, collocation t_n + tau)
         M3 = (4 U^n - U^{n-1})/(2 tau) + force   (bdf2)
  3. three generalized Stokes solves with mass coefficient
         c = 2/tau (cn), 1/tau (bdf1), 3/(2 tau) (bdf2)
  4. close the decomposition U = alpha U1 + beta U2 + U3 with the 2x2 system
         [1 - (F,U1)   -(F,U2) ] [alpha]   [(F,U3)]
         [  -(G,U1)  1 - (G,U2)] [beta ] = [(G,U3)]
  5. cn schemes advance the half-step field: U^{n+1} = 2 U^{1/2} - U^n.

Unique solvability of the step makes the 2x2 determinant nonzero; it is
asserted against a scale-aware floor and recorded in the step diagnostics
together with the collocation-field divergence and the residual of the
scheme's discrete energy identity (extended by the forcing work term, so it
is exact on forced runs too).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import SolverError, ValidationError
from .grid import (
    EW,
    NS,
    VelocityField,
    field_inner,
    sample_function,
    zero_pressure,
)
from .operators import StencilBank, convection_parts
from .stokes import plan_solver, solve_stokes_many

CN1 = "cn1"
CN2 = "cn2"
BDF1 = "bdf1"
BDF2 = "bdf2"
VCN2 = "vcn2"
VBDF2 = "vbdf2"
SCHEMES = (CN1, CN2, BDF1, BDF2, VCN2, VBDF2)
SECOND_ORDER = frozenset((CN2, BDF2, VCN2, VBDF2))
CN_FAMILY = frozenset((CN1, CN2, VCN2))

DEFAULT_EPS_DET_COEFF = 1e-12  # eps_det = coeff * (1 + max|A|^2)


def startup_scheme(scheme):
    return CN1 if scheme in CN_FAMILY else BDF1


def mass_coefficient(scheme, tau, r=1.0):
    """Helmholtz mass coefficient c of one step (variable-step bdf2 needs r)."""
    if tau <= 0:
        raise ValidationError(f"step size must be positive, got {tau}")
    if scheme in CN_FAMILY:
        return 2.0 / tau
    if scheme == BDF1:
        return 1.0 / tau
    if scheme == BDF2:
        return 3.0 / (2.0 * tau)
    if scheme == VBDF2:
        return (1.0 + 2.0 * r) / (tau * (1.0 + r))
    raise ValidationError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class StepDiagnostics:
    """Per-step monitors recorded by the time series."""

    tau: float
    alpha: float
    beta: float
    det_A: float
    div_inf: float
    dissipation: float
    forcing_work: float
    identity_residual: float
    energy: float
    energy_before: float
    e_hat: Optional[float] = None


@dataclass(frozen=True)
class SimulationState:
    n: int
    t: float
    Un: VelocityField
    Unm1: Optional[VelocityField]
    Pn: object
    tau_n: float
    scheme: str
    diag: Optional[StepDiagnostics] = None


@dataclass(frozen=True)
class AlphaBetaSystem:
    A: np.ndarray
    b: np.ndarray


def assemble_alpha_beta(Ubar, U1, U2, U3, grid, parts=None):
    """The 2x2 closure system from the decomposition inner products."""
    if parts is None:
        parts = convection_parts(Ubar, StencilBank(grid))
    F, G = parts.Fpart, parts.Gpart
    A = np.array(
        [
            [1.0 - field_inner(F, U1, grid), -field_inner(F, U2, grid)],
            [-field_inner(G, U1, grid), 1.0 - field_inner(G, U2, grid)],
        ]
    )
    b = np.array([field_inner(F, U3, grid), field_inner(G, U3, grid)])
    return AlphaBetaSystem(A, b)


def solve_2x2(sys, eps_det=None):
    """Solve A (alpha, beta)^T = b by elimination, guarding the determinant."""
    A, b = sys.A, sys.b
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    floor = (
        DEFAULT_EPS_DET_COEFF * (1.0 + float(np.max(np.abs(A))) ** 2)
        if eps_det is None
        else float(eps_det)
    )
    if not np.isfinite(det) or abs(det) <= floor:
        raise SolverError(
            f"singular 2x2 closure system (|det A| = {abs(det):.3e} <= {floor:.3e}); "
            "the unique-solvability guarantee requires tau > 0 and finite fields"
        )
    alpha = (b[0] * A[1, 1] - b[1] * A[0, 1]) / det
    beta = (A[0, 0] * b[1] - A[1, 0] * b[0]) / det
    return float(alpha), float(beta)


def _sample_forcing(grid, forcing, t):
    f1, f2 = forcing
    return VelocityField(
        sample_function(grid, EW, f1, t), sample_function(grid, NS, f2, t)
    )


def _energy(U, grid):
    return 0.5 * field_inner(U, U, grid)


def _bdf2_energy(Un, Unm1, grid):
    return 0.25 * (
        field_inner(Un, Un, grid)
        + field_inner(2.0 * Un - Unm1, 2.0 * Un - Unm1, grid)
    )


def _run_step(state, plan, tau, scheme, Ubar, M3, forcing, eps_det):
    """Shared three-solve pipeline; returns the advanced state with diagnostics."""
    grid, bank = plan.grid, plan.bank
    lid = grid.bc.lid_speed

    parts = convection_parts(Ubar, bank)
    M1 = -1.0 * parts.Gpart
    M2 = parts.Fpart
    t_coll = state.t + (0.5 * tau if scheme in CN_FAMILY else tau)
    F = None
    if forcing is not None:
        F = _sample_forcing(grid, forcing, t_coll)
        M3 = M3 + F

    (U1, P1), (U2, P2), (U3, P3) = solve_stokes_many(
        plan, [M1, M2, M3], [0.0, 0.0, lid]
    )

    sys = assemble_alpha_beta(Ubar, U1, U2, U3, grid, parts=parts)
    alpha, beta = solve_2x2(sys, eps_det)
    det = sys.A[0, 0] * sys.A[1, 1] - sys.A[0, 1] * sys.A[1, 0]

    Uc = alpha * U1 + beta * U2 + U3
    Pc = alpha * P1 + beta * P2 + P3

    if scheme in CN_FAMILY:
        Unew = 2.0 * Uc - state.Un
    else:
        Unew = Uc

    # step monitors: collocation divergence, dissipation, energy identity
    div = bank.divergence(Uc.u, Uc.v)
    div_inf = float(np.max(np.abs(div)))
    lap = VelocityField(bank.laplacian(Uc.u, EW), bank.laplacian(Uc.v, NS))
    dissipation = plan.nu * field_inner(lap, Uc, grid)
    work = field_inner(F, Uc, grid) if F is not None else 0.0

    e_before = _energy(state.Un, grid)
    e_after = _energy(Unew, grid)
    e_hat = None
    if scheme in CN_FAMILY:
        lhs = (e_after - e_before) / tau
        rhs = dissipation + work
    elif scheme == BDF1:
        d = Unew - state.Un
        lhs = (e_after - e_before) / tau
        rhs = dissipation - field_inner(d, d, grid) / (2.0 * tau) + work
    else:  # bdf2 / vbdf2: residual of the constant-step identity (monitor)
        d2 = Unew - 2.0 * state.Un + state.Unm1
        lhs = (_bdf2_energy(Unew, state.Un, grid) - _bdf2_energy(state.Un, state.Unm1, grid)) / tau
        rhs = dissipation - field_inner(d2, d2, grid) / (4.0 * tau) + work
        e_hat = _bdf2_energy(Unew, state.Un, grid)
    identity_residual = abs(lhs - rhs) / max(1.0, e_before)

    diag = StepDiagnostics(
        tau=tau,
        alpha=alpha,
        beta=beta,
        det_A=float(det),
        div_inf=div_inf,
        dissipation=dissipation,
        forcing_work=work,
        identity_residual=identity_residual,
        energy=e_after,
        energy_before=e_before,
        e_hat=e_hat,
    )
    keep_prev = state.scheme in SECOND_ORDER
    return SimulationState(
        n=state.n + 1,
        t=state.t + tau,
        Un=Unew,
        Unm1=state.Un.copy() if keep_prev else None,
        Pn=Pc,
        tau_n=tau,
        scheme=state.scheme,
        diag=diag,
    )


def step(state, plan, forcing=None, tau=None, eps_det=None):
    """Advance one uniform step of cn1/cn2/bdf1/bdf2 using a matching plan."""
    scheme = state.scheme
    if scheme not in (CN1, CN2, BDF1, BDF2):
        raise ValidationError(
            f"step() handles the uniform schemes; use step_variable for {scheme}"
        )
    if tau is None:
        if scheme in CN_FAMILY:
            tau = 2.0 / plan.c
        elif scheme == BDF1:
            tau = 1.0 / plan.c
        else:
            tau = 1.5 / plan.c
    expected_c = mass_coefficient(scheme, tau)
    if abs(plan.c - expected_c) > 1e-9 * expected_c:
        raise ValidationError(
            f"plan mass coefficient {plan.c} does not match {scheme} at tau={tau} "
            f"(expected {expected_c})"
        )
    if scheme in (CN2, BDF2) and state.Unm1 is None:
        raise ValidationError(f"{scheme} needs two history levels; run the startup step first")

    if scheme == CN1 or scheme == BDF1:
        Ubar = state.Un
    elif scheme == CN2:
        Ubar = 0.5 * (3.0 * state.Un - state.Unm1)
    else:
        Ubar = 2.0 * state.Un - state.Unm1

    if scheme in CN_FAMILY:
        M3 = (2.0 / tau) * state.Un
    elif scheme == BDF1:
        M3 = (1.0 / tau) * state.Un
    else:
        M3 = (1.0 / (2.0 * tau)) * (4.0 * state.Un - state.Unm1)

    return _run_step(state, plan, tau, scheme, Ubar, M3, forcing, eps_det)


def init_state(problem, grid, scheme, tau, forcing=None):
    """Initial state: sampled initial condition, plus the first-order startup
    step for the second-order schemes.

    `forcing` defaults to the problem's own forcing; pass explicitly to
    override (tests use this to drive manufactured cases).
    """
    if scheme not in SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}")
    if tau <= 0:
        raise ValidationError(f"step size must be positive, got {tau}")
    u0 = sample_function(grid, EW, lambda x, y, t: problem.initial_u(x, y), 0.0)
    v0 = sample_function(grid, NS, lambda x, y, t: problem.initial_v(x, y), 0.0)
    # wall-collocated normal components carry the (zero-flux) boundary data
    if not grid.bc.periodic_x:
        u0[0, :] = 0.0
    if not grid.bc.periodic_y:
        v0[:, 0] = 0.0
    U0 = VelocityField(u0, v0)
    state = SimulationState(
        n=0, t=0.0, Un=U0, Unm1=None, Pn=zero_pressure(grid), tau_n=tau, scheme=scheme
    )
    if scheme in (CN1, BDF1):
        return state

    if forcing is None:
        forcing = problem.forcing
    first = startup_scheme(scheme)
    plan = plan_solver(grid, mass_coefficient(first, tau), problem.nu)
    boot = replace(state, scheme=first)
    boot = step(boot, plan, forcing=forcing, tau=tau)
    return SimulationState(
        n=1,
        t=boot.t,
        Un=boot.Un,
        Unm1=U0,
        Pn=boot.Pn,
        tau_n=tau,
        scheme=scheme,
        diag=boot.diag,
    )
