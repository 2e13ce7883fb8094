"""Randomized operator-identity and scheme-identity checks.

Shared by the `nsstab properties` subcommand and the acceptance suite: each
check returns (name, worst_value, bound, passed) so callers can print a
table or assert.  Fields are drawn uniformly from [-1, 1] so the stated
absolute tolerances track roundoff, not field magnitude.
"""

from __future__ import annotations

import numpy as np

from .grid import (
    PressureField,
    VelocityField,
    build_grid,
    dirichlet_xy,
    field_inner,
    field_norm,
    inner_product,
    periodic_x_slip_y,
    periodic_xy,
)
from .operators import C, StencilBank, b_apply, divergence, gradient, laplacian
from .problems import taylor_green
from .schemes import BDF1, BDF2, CN1, CN2, init_state, mass_coefficient, step
from .stokes import plan_solver

IDENTITY_GRIDS = ((4, 4), (6, 6), (5, 7), (32, 32))


def operator_identity_suite(trials=1000, seed=20240901, grids=IDENTITY_GRIDS):
    """Lemma-level identities on random fields, spread across the grid list.

    Returns a list of (name, worst, bound, passed).
    """
    rng = np.random.default_rng(seed)
    worst_b = worst_adj = worst_comp = 0.0
    per_grid = max(1, trials // len(grids))
    for Nx, Ny in grids:
        grid = build_grid(1.0, 1.0, Nx, Ny, periodic_xy())
        bank = StencilBank(grid)
        for _ in range(per_grid):
            U = VelocityField(
                rng.uniform(-1, 1, grid.shape), rng.uniform(-1, 1, grid.shape)
            )
            V = VelocityField(
                rng.uniform(-1, 1, grid.shape), rng.uniform(-1, 1, grid.shape)
            )
            P = PressureField(rng.uniform(-1, 1, grid.shape))

            B = b_apply(U, V, bank)
            scale = max(1.0, field_norm(B, grid) * field_norm(V, grid))
            worst_b = max(worst_b, abs(field_inner(B, V, grid)) / scale)

            adj = field_inner(gradient(P, bank), V, grid) + inner_product(
                P.p, divergence(V, bank).p, grid
            )
            worst_adj = max(worst_adj, abs(adj))

            comp = divergence(gradient(P, bank), bank).p - laplacian(P.p, bank, C)
            worst_comp = max(worst_comp, float(np.max(np.abs(comp))))
    return [
        ("stabilized convection antisymmetry (B(U,V),V)_h = 0", worst_b, 1e-13, worst_b <= 1e-13),
        ("divergence/gradient adjointness", worst_adj, 1e-13, worst_adj <= 1e-13),
        ("div(grad P) = lap P composition", worst_comp, 1e-12, worst_comp <= 1e-12),
    ]


def wall_adjointness_suite(trials=50, seed=11, n=12):
    """Adjointness defect of the ghost-modified operators, per boundary kind.

    The defect is measured (not assumed zero): fields honor the
    wall-collocated normal conditions, matching what the solvers produce.
    """
    rng = np.random.default_rng(seed)
    results = []
    for bc in (dirichlet_xy(0.0), periodic_x_slip_y()):
        grid = build_grid(1.0, 1.0, n, n, bc)
        bank = StencilBank(grid)
        worst = 0.0
        for _ in range(trials):
            P = PressureField(rng.uniform(-1, 1, grid.shape))
            u = rng.uniform(-1, 1, grid.shape)
            v = rng.uniform(-1, 1, grid.shape)
            if not bc.periodic_x:
                u[0, :] = 0.0
            v[:, 0] = 0.0
            W = VelocityField(u, v)
            defect = field_inner(gradient(P, bank), W, grid) + inner_product(
                P.p, divergence(W, bank).p, grid
            )
            worst = max(worst, abs(defect))
        results.append(
            (f"adjointness defect under {bc.kind}", worst, 1e-13, worst <= 1e-13)
        )
    return results


def scheme_identity_suite(steps=5, tau=1e-2, n=48, seed=7):
    """Per-step discrete energy identity of each uniform scheme on Taylor-Green."""
    problem = taylor_green(0.001)
    grid = build_grid(1.0, 1.0, n, n, periodic_xy())
    results = []
    for scheme in (CN1, CN2, BDF1, BDF2):
        state = init_state(problem, grid, scheme, tau)
        plan = plan_solver(grid, mass_coefficient(scheme, tau), problem.nu)
        worst = state.diag.identity_residual if state.diag is not None else 0.0
        for _ in range(steps):
            state = step(state, plan, tau=tau)
            worst = max(worst, state.diag.identity_residual)
        results.append(
            (f"{scheme} energy identity residual", worst, 1e-11, worst <= 1e-11)
        )
    return results


def run_all(trials=1000):
    return (
        operator_identity_suite(trials=trials)
        + wall_adjointness_suite()
        + scheme_identity_suite()
    )
