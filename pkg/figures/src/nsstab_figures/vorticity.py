"""Corner-collocated vorticity from staggered velocity snapshots.

This is the one physical quantity the plotting layer recomputes; the
difference rule matches the solver's diagnostics bit for bit on interior
corners and is pinned by a shared fixture (tests/fixtures/vorticity_*)."""

from __future__ import annotations

import numpy as np


def interior_vorticity(u, v, hx, hy):
    """dv/dx - du/dy on the (nx-1) x (ny-1) interior cell corners.

    Corner (a*hx, b*hy) for a = 1..nx-1, b = 1..ny-1; u rows are x indices
    (u[a, b] at x = a*hx, y = (b+1/2)*hy; v[a, b] at x = (a+1/2)*hx,
    y = b*hy), so no boundary assumptions are needed.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    dvdx = (v[1:, 1:] - v[:-1, 1:]) / hx
    dudy = (u[1:, 1:] - u[1:, :-1]) / hy
    return dvdx - dudy


def corner_coordinates(nx, ny, hx, hy):
    """(x, y) 1D arrays of the interior corners."""
    return np.arange(1, nx) * hx, np.arange(1, ny) * hy
