"""Exact solvers for the constant-coefficient generalized Stokes system

    (c - nu*Lap_h) U + Grad_h P = M,      Div_h U = 0,      (P, 1)_h = 0,

with c > 0 the time-discretization mass coefficient.  Three backends:

  periodic_xy         pressure Poisson + Helmholtz, both diagonalized by the
                      2D DFT (the divergence of the solution vanishes to
                      roundoff because Div_h Grad_h = Lap_h holds symbol by
                      symbol for the circulant stencils)
  periodic_x_slip_y   DFT in x only; for each x-wavenumber a coupled sparse
                      solve in (u_hat, v_hat, p_hat) along y, so discrete
                      divergence-freedom is enforced exactly
  dirichlet_xy        one sparse LU of the full (u, v, p) saddle-point system,
                      reused for every right-hand side

Wall-collocated normal velocities (u on the left wall, v on the bottom wall)
are pinned by identity rows; the right/top wall values are known zeros that
never enter the unknown vector.  An inhomogeneous tangential lid enters only
through the right-hand side (the `lid` argument of solve_stokes), so one
factorization serves the homogeneous and lid-driven solves of a time step.

Pressure gauge: the spectral path zeroes the (0,0) mode; the wall paths pin
one pressure value during the solve (the divergence equation dropped for it
is implied by the remaining rows, so incompressibility still holds there to
factorization precision) and subtract the discrete mean afterward.  A dense
mean-constraint border was measured to inflate the LU fill about 3.4x and
the per-step solve cost about 6x, so the pinned gauge is used instead.

Each time step needs three solves against one plan; solve_stokes_many
batches them through a single factorization pass (and one stacked FFT on the
spectral path).
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import splu

from .errors import SolverError, ValidationError
from .grid import (
    PERIODIC_X_SLIP_Y,
    PERIODIC_XY,
    PressureField,
    VelocityField,
    inner_product,
    norms,
)
from .operators import StencilBank

POISSON_COMPAT_RTOL = 1e-10


class StokesPlan:
    """Precomputed spectral tables or factorizations for one (grid, c, nu)."""

    def __init__(self, grid, c, nu):
        if not c > 0:
            raise ValidationError(f"mass coefficient c must be positive, got {c}")
        if not nu > 0:
            raise ValidationError(f"viscosity nu must be positive, got {nu}")
        self.grid = grid
        self.c = float(c)
        self.nu = float(nu)
        self.bank = StencilBank(grid)
        self.kind = grid.bc.kind

        Nx, Ny, hx, hy = grid.Nx, grid.Ny, grid.hx, grid.hy
        # full eigenvalue tables of the 1D periodic second-difference stencil
        self.lam_x = -4.0 * np.sin(np.pi * np.arange(Nx) / Nx) ** 2 / hx**2
        self.lam_y = -4.0 * np.sin(np.pi * np.arange(Ny) / Ny) ** 2 / hy**2

        if self.kind == PERIODIC_XY:
            self._init_spectral()
        elif self.kind == PERIODIC_X_SLIP_Y:
            self._init_slip()
        else:
            self._init_dirichlet()

    # ---- periodic: 2D DFT diagonalization --------------------------------

    def _init_spectral(self):
        Nx, Ny, hx, hy = self.grid.Nx, self.grid.Ny, self.grid.hx, self.grid.hy
        thx = 2.0 * np.pi * np.arange(Nx) / Nx
        thy = 2.0 * np.pi * np.arange(Ny // 2 + 1) / Ny
        # forward-difference symbol of the divergence stencil and its adjoint
        self._sx = ((np.exp(1j * thx) - 1.0) / hx)[:, None]
        self._sy = ((np.exp(1j * thy) - 1.0) / hy)[None, :]
        self._gx = ((1.0 - np.exp(-1j * thx)) / hx)[:, None]
        self._gy = ((1.0 - np.exp(-1j * thy)) / hy)[None, :]
        lam = (2.0 * np.cos(thx) - 2.0)[:, None] / hx**2 + (2.0 * np.cos(thy) - 2.0)[None, :] / hy**2
        self._lam = lam
        self._lam_safe = lam.copy()
        self._lam_safe[0, 0] = 1.0  # zero mode handled by gauge
        self._helm = self.c - self.nu * lam
        if not np.all(self._helm > 0):
            raise SolverError("Helmholtz symbol lost positivity (c, nu must be positive)")

    def _spectral_poisson(self, rhs):
        rhat = np.fft.rfft2(rhs)
        phat = rhat / self._lam_safe
        phat[0, 0] = 0.0
        return np.fft.irfft2(phat, s=self.grid.shape)

    def _spectral_helmholtz(self, rhs):
        return np.fft.irfft2(np.fft.rfft2(rhs) / self._helm, s=self.grid.shape)

    def _spectral_stokes_many(self, Ms):
        s = self.grid.shape
        mu = np.fft.rfft2(np.stack([M.u for M in Ms]), s=s, axes=(-2, -1))
        mv = np.fft.rfft2(np.stack([M.v for M in Ms]), s=s, axes=(-2, -1))
        dhat = self._sx * mu + self._sy * mv
        phat = dhat / self._lam_safe
        phat[:, 0, 0] = 0.0
        uhat = (mu - self._gx * phat) / self._helm
        vhat = (mv - self._gy * phat) / self._helm
        u = np.fft.irfft2(uhat, s=s, axes=(-2, -1))
        v = np.fft.irfft2(vhat, s=s, axes=(-2, -1))
        p = np.fft.irfft2(phat, s=s, axes=(-2, -1))
        return [
            (VelocityField(u[i], v[i]), PressureField(p[i])) for i in range(len(Ms))
        ]

    # ---- periodic x / slip y: per-wavenumber coupled solves ---------------

    def _init_slip(self):
        grid = self.grid
        Nx, Ny, hx, hy = grid.Nx, grid.Ny, grid.hx, grid.hy
        c, nu = self.c, self.nu
        thx = 2.0 * np.pi * np.arange(Nx // 2 + 1) / Nx
        sx = (np.exp(1j * thx) - 1.0) / hx      # divergence symbol
        gx = (1.0 - np.exp(-1j * thx)) / hx     # x pressure-gradient symbol
        lamx = (2.0 * np.cos(thx) - 2.0) / hx**2
        self._slip_sx = sx
        self._slip_gx = gx
        ay2 = nu / hy**2
        self._slip_lu = []
        for k in range(Nx // 2 + 1):
            iu = lambda j: j
            iv = lambda j: Ny + j
            ip = lambda j: 2 * Ny + j
            n = 3 * Ny
            rows, cols, vals = [], [], []

            def add(r, cc, v):
                rows.append(r)
                cols.append(cc)
                vals.append(v)

            base = c - nu * lamx[k]
            for j in range(Ny):
                # u momentum, slip walls: even-reflection second difference in y
                r = iu(j)
                diag = base + 2.0 * ay2
                if j > 0:
                    add(r, iu(j - 1), -ay2)
                else:
                    diag -= ay2
                if j + 1 < Ny:
                    add(r, iu(j + 1), -ay2)
                else:
                    diag -= ay2
                add(r, r, diag)
                add(r, ip(j), gx[k])

                # v momentum; v is wall-collocated at y=0 and zero at y=Ly
                r = iv(j)
                if j == 0:
                    add(r, r, 1.0)
                else:
                    diag = base + 2.0 * ay2
                    add(r, iv(j - 1), -ay2)
                    if j + 1 < Ny:
                        add(r, iv(j + 1), -ay2)
                    add(r, r, diag)
                    add(r, ip(j), 1.0 / hy)
                    add(r, ip(j - 1), -1.0 / hy)

                # cell divergence; at k=0 the gauge pins p_hat[0] instead of
                # the (implied) divergence row of the first cell
                r = ip(j)
                if k == 0 and j == 0:
                    add(r, ip(0), 1.0)
                    continue
                add(r, iu(j), sx[k])
                add(r, iv(j), -1.0 / hy)
                if j + 1 < Ny:
                    add(r, iv(j + 1), 1.0 / hy)
            A = csc_matrix(
                (np.asarray(vals, dtype=complex), (rows, cols)), shape=(n, n)
            )
            try:
                self._slip_lu.append(splu(A))
            except RuntimeError as exc:
                raise SolverError(
                    f"periodic_x_slip_y wavenumber block k={k} failed to factorize: {exc}"
                ) from exc

    def _slip_stokes_many(self, Ms):
        grid = self.grid
        Nx, Ny = grid.Nx, grid.Ny
        m = len(Ms)
        mu = np.fft.rfft(np.stack([M.u for M in Ms]), n=Nx, axis=1)
        mv = np.fft.rfft(np.stack([M.v for M in Ms]), n=Nx, axis=1)
        nk = Nx // 2 + 1
        sol = np.empty((m, nk, 3 * Ny), dtype=complex)
        rhs = np.zeros((3 * Ny, m), dtype=complex)
        for k in range(nk):
            rhs[:Ny] = mu[:, k, :].T
            rhs[Ny] = 0.0  # v wall pin
            rhs[Ny + 1 : 2 * Ny] = mv[:, k, 1:].T
            rhs[2 * Ny :] = 0.0
            out = self._slip_lu[k].solve(rhs)
            sol[:, k, :] = out.T
        results = []
        for i in range(m):
            U = VelocityField(
                np.fft.irfft(sol[i, :, :Ny], n=Nx, axis=0),
                np.fft.irfft(sol[i, :, Ny : 2 * Ny], n=Nx, axis=0),
            )
            P = np.fft.irfft(sol[i, :, 2 * Ny :], n=Nx, axis=0)
            P -= P.mean()
            results.append((U, PressureField(P)))
        return results

    # ---- dirichlet: one sparse saddle-point factorization -----------------

    def _init_dirichlet(self):
        grid = self.grid
        Nx, Ny, hx, hy = grid.Nx, grid.Ny, grid.hx, grid.hy
        c, nu = self.c, self.nu
        n = Nx * Ny
        ax2, ay2 = nu / hx**2, nu / hy**2

        def iu(a, b):
            return a * Ny + b

        def iv(a, b):
            return n + a * Ny + b

        def ip(a, b):
            return 2 * n + a * Ny + b

        rows, cols, vals = [], [], []

        def add(r, cc, v):
            rows.append(r)
            cols.append(cc)
            vals.append(v)

        for a in range(Nx):
            for b in range(Ny):
                # u momentum; left wall (a=0) is collocated and pinned
                r = iu(a, b)
                if a == 0:
                    add(r, r, 1.0)
                else:
                    diag = c + 2.0 * ax2 + 2.0 * ay2
                    add(r, iu(a - 1, b), -ax2)
                    if a + 1 < Nx:
                        add(r, iu(a + 1, b), -ax2)  # u(Lx, y) = 0 is known
                    if b > 0:
                        add(r, iu(a, b - 1), -ay2)
                    else:
                        diag += ay2  # tangential reflection ghost
                    if b + 1 < Ny:
                        add(r, iu(a, b + 1), -ay2)
                    else:
                        diag += ay2  # lid data goes to the right-hand side
                    add(r, r, diag)
                    add(r, ip(a, b), 1.0 / hx)
                    add(r, ip(a - 1, b), -1.0 / hx)

                # v momentum; bottom wall (b=0) is collocated and pinned
                r = iv(a, b)
                if b == 0:
                    add(r, r, 1.0)
                else:
                    diag = c + 2.0 * ax2 + 2.0 * ay2
                    add(r, iv(a, b - 1), -ay2)
                    if b + 1 < Ny:
                        add(r, iv(a, b + 1), -ay2)  # v(x, Ly) = 0 is known
                    if a > 0:
                        add(r, iv(a - 1, b), -ax2)
                    else:
                        diag += ax2
                    if a + 1 < Nx:
                        add(r, iv(a + 1, b), -ax2)
                    else:
                        diag += ax2
                    add(r, r, diag)
                    add(r, ip(a, b), 1.0 / hy)
                    add(r, ip(a, b - 1), -1.0 / hy)

                # cell divergence; the first cell's row is implied by the rest
                # and is replaced by the pressure gauge pin
                r = ip(a, b)
                if a == 0 and b == 0:
                    add(r, ip(0, 0), 1.0)
                    continue
                add(r, iu(a, b), -1.0 / hx)
                if a + 1 < Nx:
                    add(r, iu(a + 1, b), 1.0 / hx)
                add(r, iv(a, b), -1.0 / hy)
                if b + 1 < Ny:
                    add(r, iv(a, b + 1), 1.0 / hy)

        A = csc_matrix((vals, (rows, cols)), shape=(3 * n, 3 * n))
        try:
            self._dir_lu = splu(A)
        except RuntimeError as exc:
            raise SolverError(
                f"dirichlet_xy saddle-point factorization failed (c={c}, nu={nu}): {exc}"
            ) from exc

    def _dirichlet_stokes_many(self, Ms, lids):
        grid = self.grid
        Nx, Ny, hy = grid.Nx, grid.Ny, grid.hy
        n = Nx * Ny
        m = len(Ms)
        rhs = np.zeros((3 * n, m))
        for i, (M, lid) in enumerate(zip(Ms, lids)):
            ru = M.u.copy()
            ru[0, :] = 0.0  # pinned wall-collocated unknowns
            if lid != 0.0:
                ru[1:, Ny - 1] += self.nu * 2.0 * lid / hy**2
            rv = M.v.copy()
            rv[:, 0] = 0.0
            rhs[:n, i] = ru.ravel()
            rhs[n : 2 * n, i] = rv.ravel()
        sol = self._dir_lu.solve(rhs)
        results = []
        for i in range(m):
            U = VelocityField(
                sol[:n, i].reshape(Nx, Ny), sol[n : 2 * n, i].reshape(Nx, Ny)
            )
            P = sol[2 * n : 3 * n, i].reshape(Nx, Ny)
            P = P - P.mean()
            results.append((U, PressureField(P)))
        return results


def plan_solver(grid, c, nu):
    """Build a StokesPlan for one (grid, boundary kind, c, nu)."""
    return StokesPlan(grid, c, nu)


def solve_poisson(plan, rhs):
    """Solve Lap_h P = rhs with (P, 1)_h = 0 on the periodic path."""
    if plan.kind != PERIODIC_XY:
        raise ValidationError(
            "the spectral pressure-Poisson solve is only available under periodic boundaries"
        )
    r = rhs.p if isinstance(rhs, PressureField) else np.asarray(rhs)
    l2, _ = norms(r, plan.grid)
    mean = inner_product(r, np.ones_like(r), plan.grid)
    if abs(mean) > POISSON_COMPAT_RTOL * max(l2, np.finfo(float).tiny):
        raise SolverError(
            f"incompatible Poisson right-hand side: (rhs, 1)_h = {mean:.3e} is not "
            f"within {POISSON_COMPAT_RTOL:g} * ||rhs||_h of the solvability condition"
        )
    return PressureField(plan._spectral_poisson(r))


def solve_helmholtz(plan, rhs):
    """Solve (c - nu*Lap_h) X = rhs on the periodic path."""
    if plan.kind != PERIODIC_XY:
        raise ValidationError(
            "the spectral Helmholtz solve is only available under periodic boundaries"
        )
    return plan._spectral_helmholtz(np.asarray(rhs))


def solve_stokes_many(plan, Ms, lids=None):
    """Solve the generalized Stokes system for several right-hand sides.

    `lids` gives the tangential top-wall speed imposed per solve (dirichlet
    grids only); homogeneous solves pass 0.
    """
    if lids is None:
        lids = [0.0] * len(Ms)
    if len(lids) != len(Ms):
        raise ValidationError("one lid value per right-hand side required")
    for M in Ms:
        if M.shape != plan.grid.shape:
            raise ValidationError(f"right-hand side shape {M.shape} does not match grid")
        if not M.is_finite():
            raise ValidationError("right-hand side contains non-finite entries")
    if plan.kind == PERIODIC_XY:
        return plan._spectral_stokes_many(Ms)
    if plan.kind == PERIODIC_X_SLIP_Y:
        return plan._slip_stokes_many(Ms)
    return plan._dirichlet_stokes_many(Ms, lids)


def solve_stokes(plan, M, lid=0.0):
    """Solve the generalized Stokes system for one right-hand side M."""
    return solve_stokes_many(plan, [M], [lid])[0]
