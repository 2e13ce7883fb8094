"""Energy functionals, theorem-identity residuals, error norms, vorticity,
and convergence-order estimation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .grid import C, EW, NS, field_inner, inner_product, sample_function
from .operators import StencilBank
from .schemes import BDF1, CN_FAMILY


@dataclass(frozen=True)
class EnergyRecord:
    """One row of the per-step energy bookkeeping."""

    t: float
    E: float
    E_hat: Optional[float]
    dissipation: float
    identity_residual: float
    div_inf: float
    tau: float
    det_A: float


def kinetic_energy(U, grid):
    """E = ||U||_h^2 / 2 summed over both components."""
    return 0.5 * field_inner(U, U, grid)


def bdf2_energy(Un, Unm1, grid):
    """Modified energy (||U^n||_h^2 + ||2 U^n - U^{n-1}||_h^2) / 4."""
    if Un.shape != Unm1.shape:
        raise ValidationError("history levels live on different grids")
    lead = 2.0 * Un - Unm1
    return 0.25 * (field_inner(Un, Un, grid) + field_inner(lead, lead, grid))


def energy_identity_raw(scheme, before, after, tau, nu, grid):
    """LHS - RHS of the scheme's discrete energy identity (unforced step)."""
    bank = StencilBank(grid)
    if scheme in CN_FAMILY:
        Uc = 0.5 * (before.Un + after.Un)
        lhs = (kinetic_energy(after.Un, grid) - kinetic_energy(before.Un, grid)) / tau
    else:
        Uc = after.Un
        if scheme == BDF1:
            lhs = (kinetic_energy(after.Un, grid) - kinetic_energy(before.Un, grid)) / tau
        else:
            lhs = (bdf2_energy(after.Un, before.Un, grid) - bdf2_energy(before.Un, before.Unm1, grid)) / tau
    lap_u = bank.laplacian(Uc.u, EW)
    lap_v = bank.laplacian(Uc.v, NS)
    rhs = nu * (inner_product(lap_u, Uc.u, grid) + inner_product(lap_v, Uc.v, grid))
    if scheme == BDF1:
        d = after.Un - before.Un
        rhs -= field_inner(d, d, grid) / (2.0 * tau)
    elif scheme not in CN_FAMILY:
        d2 = after.Un - 2.0 * before.Un + before.Unm1
        rhs -= field_inner(d2, d2, grid) / (4.0 * tau)
    return lhs - rhs


def energy_identity_residual(scheme, before, after, tau, nu, grid, forcing=None):
    """|LHS - RHS| of the theorem identity, normalized by max(1, E before).

    Defined for unforced uniform steps only; a forced step is a contract
    violation (the caller should use the work-corrected step diagnostics).
    """
    if forcing is not None:
        raise ValidationError("the theorem identity applies to unforced steps only")
    raw = energy_identity_raw(scheme, before, after, tau, nu, grid)
    return abs(raw) / max(1.0, kinetic_energy(before.Un, grid))


@dataclass(frozen=True)
class ErrorNorms:
    u_linf: float     # joint max over both velocity components
    u_l2: float
    p_linf: float
    p_l2: float
    u_linf_comp: tuple  # (u, v) component maxima


def error_norms(U, P, problem, t, grid, p_time=None):
    """Errors against the problem's exact solution at time t.

    Pressure is compared mean-free (both sides get their discrete mean
    removed); p_time lets cn-type callers evaluate the exact pressure at its
    own collocation instant.
    """
    if problem.exact is None:
        raise ValidationError(f"problem {problem.name!r} carries no exact solution")
    ue, ve, pe = problem.exact
    du = U.u - sample_function(grid, EW, ue, t)
    dv = U.v - sample_function(grid, NS, ve, t)
    pd = P.p - P.p.mean()
    ps = sample_function(grid, C, pe, t if p_time is None else p_time)
    dp = pd - (ps - ps.mean())
    area = grid.cell_area
    u_inf = float(np.max(np.abs(du)))
    v_inf = float(np.max(np.abs(dv)))
    return ErrorNorms(
        u_linf=max(u_inf, v_inf),
        u_l2=float(np.sqrt(area * (np.sum(du * du) + np.sum(dv * dv)))),
        p_linf=float(np.max(np.abs(dp))),
        p_l2=float(np.sqrt(area * np.sum(dp * dp))),
        u_linf_comp=(u_inf, v_inf),
    )


def vorticity(U, grid, bank=None):
    """Corner-collocated scalar vorticity dv/dx - du/dy."""
    if bank is None:
        bank = StencilBank(grid)
    return bank.vorticity(U.u, U.v)


def observed_order(errors, taus):
    """Pairwise convergence orders log(e_k/e_{k+1}) / log(tau_k/tau_{k+1})."""
    errors = list(errors)
    taus = list(taus)
    if len(errors) != len(taus) or len(errors) < 2:
        raise ValidationError("need matching error/step lists of length >= 2")
    if any(t2 >= t1 for t1, t2 in zip(taus, taus[1:])):
        raise ValidationError("step sizes must be strictly decreasing")
    if any((not np.isfinite(e)) or e <= 0 for e in errors):
        raise ValidationError("errors must be finite and positive")
    return [
        float(np.log(e1 / e2) / np.log(t1 / t2))
        for (e1, e2, t1, t2) in zip(errors, errors[1:], taus, taus[1:])
    ]
