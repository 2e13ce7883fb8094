"""Discrete staggered-grid operators: divergence, gradient, Laplacian, and the
stabilized convection split F/G/B.

Every operator is a 3-point stencil applied through a one-cell ghost border,
so one code path serves all boundary kinds:

  periodic axis        ghost = wrap-around value
  tangential wall      ghost = 2*g - W_in   (reflection through the wall value g)
  slip wall            ghost = W_in         (even reflection, zero normal derivative)
  normal wall          the near-wall unknown is collocated on the wall; the
                       outward ghost reflects through it (2*W[0] - W[1]) and the
                       far-wall entry is the known wall value itself
  pressure at walls    ghost = W_in         (zero normal pressure gradient)

With the first array index along x, the periodic stencils reproduce exactly
the circulant matrices C(N), D1(N,h), D2(N,h), D3(N,h) acting by left
multiplication in x and right (transposed) multiplication in y:

  divergence   [V_ew;V_ns] -> V_c     D2x U + V D2y^T
  gradient     V_c -> [V_ew;V_ns]     [-D2x^T P; -P D2y]
  laplacian    any space -> itself    D3x W + W D3y^T

The convection split uses F(U) = U and

  G1(U) = [U .* (D1x U) - ((Cx^T V) .* (U D2y)) Cy^T] / (F(U), U)_h
  G2(U) = [V .* (V D1y^T) - Cx ((D2x^T V) .* (U Cy))] / (F(U), U)_h
  B(Ub, W) = (F(Ub), W)_h G(Ub) - (G(Ub), W)_h F(Ub)

where .* is the Hadamard product.  (B(Ub, W), W)_h = 0 holds algebraically
for every boundary kind; the division by (F(U), U)_h is guarded so the zero
field maps to G = 0 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import C, EW, NS, VelocityField, PressureField, field_inner, zero_velocity

DEFAULT_EPS_DEN_COEFF = 1e-14  # eps_den = coeff * Lx * Ly


class StencilBank:
    """Per-grid stencil applications for one boundary kind.

    Immutable after construction; all methods are pure.  `lid` overrides the
    tangential top-wall speed used in ghost values (None keeps the grid's
    boundary data; 0.0 gives the homogeneous operator used by subsystem solves).
    """

    def __init__(self, grid, eps_den=None):
        self.grid = grid
        self.bc = grid.bc
        self.eps_den = (
            DEFAULT_EPS_DEN_COEFF * grid.Lx * grid.Ly if eps_den is None else float(eps_den)
        )

    # ---- ghost padding -------------------------------------------------

    def pad_u(self, U, lid=None):
        """(Nx+2) x (Ny+2) extension of a u-component array."""
        bc = self.bc
        E = np.empty((U.shape[0] + 2, U.shape[1] + 2))
        E[1:-1, 1:-1] = U
        if bc.periodic_x:
            E[0, 1:-1] = U[-1, :]
            E[-1, 1:-1] = U[0, :]
        else:
            # u is normal to the x walls; collocated at x=0, known 0 at x=Lx
            E[0, 1:-1] = 2.0 * U[0, :] - U[1, :]
            E[-1, 1:-1] = 0.0
        if bc.periodic_y:
            E[:, 0] = E[:, -2]
            E[:, -1] = E[:, 1]
        elif bc.slip_y:
            E[:, 0] = E[:, 1]
            E[:, -1] = E[:, -2]
        else:
            s = bc.lid_speed if lid is None else lid
            E[:, 0] = -E[:, 1]
            E[:, -1] = 2.0 * s - E[:, -2]
        return E

    def pad_v(self, V):
        """(Nx+2) x (Ny+2) extension of a v-component array."""
        bc = self.bc
        E = np.empty((V.shape[0] + 2, V.shape[1] + 2))
        E[1:-1, 1:-1] = V
        if bc.periodic_x:
            E[0, 1:-1] = V[-1, :]
            E[-1, 1:-1] = V[0, :]
        else:
            # v is tangential to the x walls, both at rest
            E[0, 1:-1] = -V[0, :]
            E[-1, 1:-1] = -V[-1, :]
        if bc.periodic_y:
            E[:, 0] = E[:, -2]
            E[:, -1] = E[:, 1]
        else:
            # v is normal to the y walls; collocated at y=0, known 0 at y=Ly
            E[:, 0] = 2.0 * E[:, 1] - E[:, 2]
            E[:, -1] = 0.0
        return E

    def pad_p(self, P):
        """(Nx+2) x (Ny+2) extension of a cell-centered array."""
        bc = self.bc
        E = np.empty((P.shape[0] + 2, P.shape[1] + 2))
        E[1:-1, 1:-1] = P
        if bc.periodic_x:
            E[0, 1:-1] = P[-1, :]
            E[-1, 1:-1] = P[0, :]
        else:
            E[0, 1:-1] = P[0, :]
            E[-1, 1:-1] = P[-1, :]
        if bc.periodic_y:
            E[:, 0] = E[:, -2]
            E[:, -1] = E[:, 1]
        else:
            E[:, 0] = E[:, 1]
            E[:, -1] = E[:, -2]
        return E

    def _pad(self, W, space, lid=None):
        if space == EW:
            return self.pad_u(W, lid=lid)
        if space == NS:
            return self.pad_v(W)
        if space == C:
            return self.pad_p(W)
        raise ValidationError(f"unknown staggered space {space!r}")

    # ---- first-order operators ------------------------------------------

    def divergence(self, U, V):
        """Cell-centered divergence (forward differences of edge values)."""
        hx, hy = self.grid.hx, self.grid.hy
        Ue = self.pad_u(U)
        Ve = self.pad_v(V)
        return (Ue[2:, 1:-1] - Ue[1:-1, 1:-1]) / hx + (Ve[1:-1, 2:] - Ve[1:-1, 1:-1]) / hy

    def gradient(self, P):
        """Edge-collocated pressure gradient (gx on ew, gy on ns)."""
        hx, hy = self.grid.hx, self.grid.hy
        Pe = self.pad_p(P)
        gx = (Pe[1:-1, 1:-1] - Pe[:-2, 1:-1]) / hx
        gy = (Pe[1:-1, 1:-1] - Pe[1:-1, :-2]) / hy
        return gx, gy

    def laplacian(self, W, space, lid=None):
        """Five-point Laplacian of an array on the given space.

        Second differences nest the two first differences so the result
        tracks the divergence-of-gradient composition to the last bits.
        """
        hx, hy = self.grid.hx, self.grid.hy
        E = self._pad(W, space, lid=lid)
        mid = E[1:-1, 1:-1]
        ddx = (E[2:, 1:-1] - mid) - (mid - E[:-2, 1:-1])
        ddy = (E[1:-1, 2:] - mid) - (mid - E[1:-1, :-2])
        return ddx / hx**2 + ddy / hy**2

    # ---- convection -------------------------------------------------------

    def convection_numerators(self, U, V, lid=None):
        """Numerators of G1 (ew) and G2 (ns) before the (F(U), U)_h division.

        Cross terms are formed on the (Nx+1) x (Ny+1) grid of cell corners and
        averaged back to the edge points.
        """
        hx, hy = self.grid.hx, self.grid.hy
        Ue = self.pad_u(U, lid=lid)
        Ve = self.pad_v(V)

        # u * du/dx at ew points (centered difference)
        adv_uu = U * (Ue[2:, 1:-1] - Ue[:-2, 1:-1]) / (2.0 * hx)
        # v * dv/dy at ns points
        adv_vv = V * (Ve[1:-1, 2:] - Ve[1:-1, :-2]) / (2.0 * hy)

        # corner-collocated factors, index (a, b) at (a*hx, b*hy), a=0..Nx, b=0..Ny
        v_corner = 0.5 * (Ve[:-1, 1:] + Ve[1:, 1:])            # x-average of v
        u_corner = 0.5 * (Ue[1:, :-1] + Ue[1:, 1:])            # y-average of u
        dudy_neg = (Ue[1:, :-1] - Ue[1:, 1:]) / hy             # -du/dy at corners
        dvdx_neg = (Ve[:-1, 1:] - Ve[1:, 1:]) / hx             # -dv/dx at corners

        cross_u = v_corner * dudy_neg
        cross_v = dvdx_neg * u_corner

        g1 = adv_uu - 0.5 * (cross_u[:-1, :-1] + cross_u[:-1, 1:])  # average back in y
        g2 = adv_vv - 0.5 * (cross_v[:-1, :-1] + cross_v[1:, :-1])  # average back in x
        return g1, g2

    def vorticity(self, U, V):
        """Corner-collocated scalar vorticity dv/dx - du/dy (Nx x Ny corners)."""
        hx, hy = self.grid.hx, self.grid.hy
        Ue = self.pad_u(U)
        Ve = self.pad_v(V)
        return (Ve[1:-1, 1:-1] - Ve[:-2, 1:-1]) / hx - (Ue[1:-1, 1:-1] - Ue[1:-1, :-2]) / hy


@dataclass(frozen=True)
class ConvectionParts:
    """F(U), G(U) and the guard denominator (F(U), U)_h of one velocity field."""

    Fpart: VelocityField
    Gpart: VelocityField
    denom: float


def divergence(W, bank):
    if W.shape != bank.grid.shape:
        raise ValidationError(f"field shape {W.shape} does not match grid {bank.grid.shape}")
    return PressureField(bank.divergence(W.u, W.v))


def gradient(P, bank):
    if P.shape != bank.grid.shape:
        raise ValidationError(f"field shape {P.shape} does not match grid {bank.grid.shape}")
    gx, gy = bank.gradient(P.p)
    return VelocityField(gx, gy)


def laplacian(W, bank, space):
    W = np.asarray(W)
    if W.shape != bank.grid.shape:
        raise ValidationError(f"array shape {W.shape} does not match grid {bank.grid.shape}")
    return bank.laplacian(W, space)


def convection_parts(U, bank, eps_den=None):
    """F(U) = U, G(U), and the denominator, with the zero-field guard."""
    eps = bank.eps_den if eps_den is None else float(eps_den)
    grid = bank.grid
    denom = field_inner(U, U, grid)
    if denom <= eps:
        return ConvectionParts(U.copy(), zero_velocity(grid), denom)
    g1, g2 = bank.convection_numerators(U.u, U.v)
    return ConvectionParts(U.copy(), VelocityField(g1 / denom, g2 / denom), denom)


def b_apply(Ubar, W, bank, parts=None):
    """B(Ubar, W) = (F(Ubar), W)_h G(Ubar) - (G(Ubar), W)_h F(Ubar)."""
    grid = bank.grid
    if parts is None:
        parts = convection_parts(Ubar, bank)
    a = field_inner(parts.Fpart, W, grid)
    g = field_inner(parts.Gpart, W, grid)
    return a * parts.Gpart - g * parts.Fpart
