"""Benchmark problem definitions: initial data, exact solutions, forcings.

All four problems live on the unit square.  Forcing follows the momentum
equation sign convention

    u_t - nu*Lap(u) + u.grad(u) + grad(p) = f,

so for the manufactured flow f is the full left-hand side evaluated on the
exact fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError
from .grid import dirichlet_xy, periodic_x_slip_y, periodic_xy

PI = np.pi

KH_TIME_UNIT = 1.0 / 28.0  # shear-layer turnover time t_bar


@dataclass(frozen=True)
class SteadyStateCriterion:
    """Stop when max|U^n - U^{n-1}| drops below tol."""

    tol: float = 1e-6

    def __post_init__(self):
        if not self.tol > 0:
            raise ValidationError(f"steady-state tolerance must be positive, got {self.tol}")


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    nu: float
    Lx: float
    Ly: float
    bc: object
    T_final: Optional[float]
    initial_u: Callable
    initial_v: Callable
    forcing: Optional[tuple] = None          # (f1(x,y,t), f2(x,y,t))
    exact: Optional[tuple] = None            # (u(x,y,t), v(x,y,t), p(x,y,t))
    exact_energy: Optional[Callable] = None  # E(t)
    default_tau: Optional[float] = None


def manufactured_flow():
    """Forced periodic flow with a known smooth solution (nu = 0.1, T = 1)."""
    nu = 0.1

    def u(x, y, t):
        return np.exp(t) * np.sin(PI * x) ** 2 * np.sin(2 * PI * y)

    def v(x, y, t):
        return -np.exp(t) * np.sin(2 * PI * x) * np.sin(PI * y) ** 2

    def p(x, y, t):
        return np.exp(t) * np.sin(2 * PI * x) * np.sin(2 * PI * y)

    def f1(x, y, t):
        et = np.exp(t)
        sx, s2x = np.sin(PI * x), np.sin(2 * PI * x)
        s2y, c2y = np.sin(2 * PI * y), np.cos(2 * PI * y)
        c2x = np.cos(2 * PI * x)
        uu = et * sx**2 * s2y
        vv = -et * s2x * np.sin(PI * y) ** 2
        u_t = uu
        u_x = et * PI * s2x * s2y
        u_y = 2 * PI * et * sx**2 * c2y
        lap_u = 2 * PI**2 * et * c2x * s2y - 4 * PI**2 * uu
        p_x = 2 * PI * et * c2x * s2y
        return u_t - nu * lap_u + uu * u_x + vv * u_y + p_x

    def f2(x, y, t):
        et = np.exp(t)
        sy, s2y = np.sin(PI * y), np.sin(2 * PI * y)
        s2x, c2x = np.sin(2 * PI * x), np.cos(2 * PI * x)
        c2y = np.cos(2 * PI * y)
        uu = et * np.sin(PI * x) ** 2 * s2y
        vv = -et * s2x * sy**2
        v_t = vv
        v_x = -2 * PI * et * c2x * sy**2
        v_y = -PI * et * s2x * s2y
        lap_v = 4 * PI**2 * et * s2x * sy**2 - 2 * PI**2 * et * s2x * c2y
        p_y = 2 * PI * et * s2x * c2y
        return v_t - nu * lap_v + uu * v_x + vv * v_y + p_y

    return ProblemSpec(
        name="manufactured",
        nu=nu,
        Lx=1.0,
        Ly=1.0,
        bc=periodic_xy(),
        T_final=1.0,
        initial_u=lambda x, y: u(x, y, 0.0),
        initial_v=lambda x, y: v(x, y, 0.0),
        forcing=(f1, f2),
        exact=(u, v, p),
    )


def taylor_green(nu=0.001):
    """Unforced decaying vortex array; exact energy E(t) = exp(-16 pi^2 nu t)/4."""
    if not nu > 0:
        raise ValidationError(f"viscosity must be positive, got {nu}")

    def decay(t):
        return np.exp(-8 * PI**2 * nu * t)

    def u(x, y, t):
        return np.sin(2 * PI * x) * np.cos(2 * PI * y) * decay(t)

    def v(x, y, t):
        return -np.cos(2 * PI * x) * np.sin(2 * PI * y) * decay(t)

    def p(x, y, t):
        return 0.25 * (np.cos(4 * PI * x) + np.cos(4 * PI * y)) * decay(t) ** 2

    return ProblemSpec(
        name="taylor_green",
        nu=nu,
        Lx=1.0,
        Ly=1.0,
        bc=periodic_xy(),
        T_final=20.0,
        initial_u=lambda x, y: u(x, y, 0.0),
        initial_v=lambda x, y: v(x, y, 0.0),
        exact=(u, v, p),
        exact_energy=lambda t: 0.25 * np.exp(-16 * PI**2 * nu * t),
    )


def lid_driven_cavity(Re):
    """Impulsively started cavity: rigid walls, unit tangential lid, Re = 1/nu."""
    if not Re > 0:
        raise ValidationError(f"Reynolds number must be positive, got {Re}")
    return ProblemSpec(
        name="lid_driven_cavity",
        nu=1.0 / Re,
        Lx=1.0,
        Ly=1.0,
        bc=dirichlet_xy(lid_speed=1.0),
        T_final=None,  # runs to the steady-state criterion
        initial_u=lambda x, y: np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y))),
        initial_v=lambda x, y: np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y))),
    )


def kelvin_helmholtz(T_units=200.0):
    """Perturbed shear layer: periodic in x, slip walls in y, nu = 1/2800.

    T_units is the horizon in shear time units t_bar = 1/28 (200 reproduces
    the full evolution; desk-scale runs use 50).
    """
    nu = 1.0 / 2800.0
    delta0 = 1.0 / 28.0
    cn = 1e-3
    u_inf = 1.0

    def psi_env(y):
        return u_inf * np.exp(-((y - 0.5) ** 2) / delta0**2)

    def u0(x, y):
        psi_y = -2.0 * (y - 0.5) / delta0**2 * psi_env(y) * (
            np.cos(8 * PI * x) + np.cos(20 * PI * x)
        )
        return u_inf * np.tanh((2.0 * y - 1.0) / delta0) + cn * psi_y

    def v0(x, y):
        psi_x = psi_env(y) * (-8 * PI * np.sin(8 * PI * x) - 20 * PI * np.sin(20 * PI * x))
        return -cn * psi_x

    return ProblemSpec(
        name="kelvin_helmholtz",
        nu=nu,
        Lx=1.0,
        Ly=1.0,
        bc=periodic_x_slip_y(),
        T_final=T_units * KH_TIME_UNIT,
        initial_u=u0,
        initial_v=v0,
        default_tau=1.0 / 600.0,
    )


_FACTORIES = {
    "manufactured": lambda **kw: manufactured_flow(),
    "taylor_green": lambda **kw: taylor_green(**kw),
    "lid_driven_cavity": lambda **kw: lid_driven_cavity(**kw),
    "kelvin_helmholtz": lambda **kw: kelvin_helmholtz(**kw),
}


def by_name(name, **kwargs):
    """Problem factory lookup used by the CLI."""
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ValidationError(
            f"unknown problem {name!r}; available: {', '.join(sorted(_FACTORIES))}"
        ) from None
    return factory(**kwargs)
