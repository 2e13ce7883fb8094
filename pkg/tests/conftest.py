"""Shared oracles: dense periodic differentiation matrices and field factories.

The dense matrices exist only here, as independent references for the
stencil implementations.
"""

import numpy as np
import pytest

from nsstab.grid import VelocityField, build_grid, periodic_xy


def dense_average(N):
    M = np.zeros((N, N))
    for i in range(N):
        M[i, i] = 0.5
        M[i, (i + 1) % N] = 0.5
    return M


def dense_centered(N, h):
    M = np.zeros((N, N))
    for i in range(N):
        M[i, (i + 1) % N] = 1.0 / (2 * h)
        M[i, (i - 1) % N] = -1.0 / (2 * h)
    return M


def dense_forward(N, h):
    M = np.zeros((N, N))
    for i in range(N):
        M[i, i] = -1.0 / h
        M[i, (i + 1) % N] = 1.0 / h
    return M


def dense_second(N, h):
    M = np.zeros((N, N))
    for i in range(N):
        M[i, i] = -2.0 / h**2
        M[i, (i + 1) % N] = 1.0 / h**2
        M[i, (i - 1) % N] = 1.0 / h**2
    return M


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_velocity(rng, grid, scale=1.0):
    return VelocityField(
        scale * rng.standard_normal(grid.shape), scale * rng.standard_normal(grid.shape)
    )


def periodic_grid(Nx, Ny, Lx=1.0, Ly=1.0):
    return build_grid(Lx, Ly, Nx, Ny, periodic_xy())
