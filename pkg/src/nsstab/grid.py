"""Staggered-grid geometry, discrete fields, and the discrete l2 inner product.

Grid layout (uniform rectangular cells, first array index runs over x):

    u[a, b]  x-velocity on vertical cell edges (ew points):
                 x = a*hx,          y = (b + 1/2)*hy,   a = 0..Nx-1, b = 0..Ny-1
    v[a, b]  y-velocity on horizontal cell edges (ns points):
                 x = (a + 1/2)*hx,  y = b*hy
    p[a, b]  pressure at cell centers (c points):
                 x = (a + 1/2)*hx,  y = (b + 1/2)*hy

All three spaces are stored as Nx x Ny arrays under every boundary kind;
walls are handled by operator stencils and ghost values, never by resizing.
Under periodic boundaries the index wraps, so x = Lx is the same edge as
x = 0.  Under walls, the wall-collocated unknowns are u[0, :] (left wall)
and v[:, 0] (bottom wall); the opposite-wall values u(Lx, y) and v(x, Ly)
are known boundary data and are not stored.

The discrete inner product is (A, B)_h = hx*hy*sum(A*B) and the norm
||A||_h = sqrt((A, A)_h), for any two same-shaped arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# staggered point sets
EW = "ew"  # vertical edges, carries u
NS = "ns"  # horizontal edges, carries v
C = "c"    # cell centers, carries p
SPACES = (EW, NS, C)

PERIODIC_XY = "periodic_xy"
DIRICHLET_XY = "dirichlet_xy"
PERIODIC_X_SLIP_Y = "periodic_x_slip_y"


@dataclass(frozen=True)
class BoundaryKind:
    """Boundary-condition descriptor.

    kind is one of periodic_xy, dirichlet_xy, periodic_x_slip_y.  lid_speed
    is the tangential velocity of the top wall (dirichlet_xy only); every
    supported boundary has zero normal flux.
    """

    kind: str
    lid_speed: float = 0.0

    def __post_init__(self):
        if self.kind not in (PERIODIC_XY, DIRICHLET_XY, PERIODIC_X_SLIP_Y):
            raise ValidationError(f"unknown boundary kind {self.kind!r}")
        if self.kind != DIRICHLET_XY and self.lid_speed != 0.0:
            raise ValidationError("lid_speed is only meaningful for dirichlet_xy")

    @property
    def periodic_x(self):
        return self.kind in (PERIODIC_XY, PERIODIC_X_SLIP_Y)

    @property
    def periodic_y(self):
        return self.kind == PERIODIC_XY

    @property
    def slip_y(self):
        return self.kind == PERIODIC_X_SLIP_Y


def periodic_xy():
    return BoundaryKind(PERIODIC_XY)


def dirichlet_xy(lid_speed=0.0):
    return BoundaryKind(DIRICHLET_XY, float(lid_speed))


def periodic_x_slip_y():
    return BoundaryKind(PERIODIC_X_SLIP_Y)


@dataclass(frozen=True)
class GridSpec:
    Lx: float
    Ly: float
    Nx: int
    Ny: int
    hx: float
    hy: float
    bc: BoundaryKind

    @property
    def shape(self):
        return (self.Nx, self.Ny)

    @property
    def cell_area(self):
        return self.hx * self.hy


def build_grid(Lx, Ly, Nx, Ny, bc):
    """Validated GridSpec with hx = Lx/Nx, hy = Ly/Ny."""
    if not (Lx > 0 and Ly > 0):
        raise ValidationError(f"domain lengths must be positive, got Lx={Lx}, Ly={Ly}")
    if not (isinstance(Nx, (int, np.integer)) and isinstance(Ny, (int, np.integer))):
        raise ValidationError("Nx and Ny must be integers")
    if Nx < 3 or Ny < 3:
        raise ValidationError(f"need Nx >= 3 and Ny >= 3 for width-3 stencils, got {Nx} x {Ny}")
    if not isinstance(bc, BoundaryKind):
        raise ValidationError("bc must be a BoundaryKind")
    return GridSpec(float(Lx), float(Ly), int(Nx), int(Ny), float(Lx) / Nx, float(Ly) / Ny, bc)


# x/y staggering offset (in units of h) of each point set, see module docstring
_OFFSETS = {EW: (0.0, 0.5), NS: (0.5, 0.0), C: (0.5, 0.5)}


def coords(grid, space):
    """1D coordinate arrays (x of length Nx, y of length Ny) of a point set."""
    try:
        ox, oy = _OFFSETS[space]
    except KeyError:
        raise ValidationError(f"unknown staggered space {space!r}") from None
    x = (np.arange(grid.Nx) + ox) * grid.hx
    y = (np.arange(grid.Ny) + oy) * grid.hy
    return x, y


def sample_function(grid, space, f, t=0.0):
    """Evaluate f(x, y, t) at every point of a staggered point set.

    Non-finite values raise, naming the offending point.
    """
    x, y = coords(grid, space)
    vals = np.asarray(f(x[:, None], y[None, :], t), dtype=float)
    if vals.shape != grid.shape:
        vals = np.broadcast_to(vals, grid.shape).copy()
    if not np.all(np.isfinite(vals)):
        a, b = np.argwhere(~np.isfinite(vals))[0]
        raise ValidationError(
            f"function evaluated to a non-finite value at ({x[a]}, {y[b]}, t={t}) on {space}"
        )
    return vals


def inner_product(A, B, grid):
    """Discrete l2 inner product hx*hy*sum_ij A_ij B_ij."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValidationError(f"inner product dimension mismatch: {A.shape} vs {B.shape}")
    return grid.cell_area * float(np.sum(A * B))


def norms(A, grid):
    """(l2, linf) norms of a 2D array; l2 uses the discrete inner product."""
    A = np.asarray(A)
    if not np.all(np.isfinite(A)):
        raise ValidationError("norms of a non-finite array")
    l2 = np.sqrt(grid.cell_area * float(np.sum(A * A)))
    linf = float(np.max(np.abs(A))) if A.size else 0.0
    return l2, linf


@dataclass(frozen=True)
class VelocityField:
    """Discrete velocity (u on ew points, v on ns points), value semantics."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.u.shape != self.v.shape:
            raise ValidationError(f"component shape mismatch: {self.u.shape} vs {self.v.shape}")

    @property
    def shape(self):
        return self.u.shape

    def copy(self):
        return VelocityField(self.u.copy(), self.v.copy())

    def __add__(self, other):
        return VelocityField(self.u + other.u, self.v + other.v)

    def __sub__(self, other):
        return VelocityField(self.u - other.u, self.v - other.v)

    def __mul__(self, a):
        return VelocityField(a * self.u, a * self.v)

    __rmul__ = __mul__

    def __neg__(self):
        return VelocityField(-self.u, -self.v)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)))


def zero_velocity(grid):
    return VelocityField(np.zeros(grid.shape), np.zeros(grid.shape))


def field_inner(U, V, grid):
    """Inner product of two velocity fields, summed over both components."""
    return inner_product(U.u, V.u, grid) + inner_product(U.v, V.v, grid)


def field_norm(U, grid):
    return np.sqrt(max(field_inner(U, U, grid), 0.0))


def field_linf(U, grid=None):
    return max(float(np.max(np.abs(U.u))), float(np.max(np.abs(U.v))))


@dataclass(frozen=True)
class PressureField:
    """Cell-centered pressure; solver outputs carry a zero discrete mean."""

    p: np.ndarray

    @property
    def shape(self):
        return self.p.shape

    def copy(self):
        return PressureField(self.p.copy())

    def __add__(self, other):
        return PressureField(self.p + other.p)

    def __sub__(self, other):
        return PressureField(self.p - other.p)

    def __mul__(self, a):
        return PressureField(a * self.p)

    __rmul__ = __mul__


def zero_pressure(grid):
    return PressureField(np.zeros(grid.shape))
