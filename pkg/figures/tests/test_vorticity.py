import os

import numpy as np

from nsstab_figures.io import read_snapshot
from nsstab_figures.vorticity import corner_coordinates, interior_vorticity

FIX = os.path.join(os.path.dirname(__file__), "fixtures")


class TestSharedFixture:
    def test_matches_solver_diagnostics_bit_for_bit(self):
        # the expected values were frozen from the solver's own corner rule
        u, v, _, meta = read_snapshot(os.path.join(FIX, "vorticity_input.dat"))
        got = interior_vorticity(u, v, meta["hx"], meta["hy"])
        expected = np.array(
            [
                [float(x) for x in line.split()]
                for line in open(os.path.join(FIX, "vorticity_expected.txt"))
            ]
        )
        assert got.shape == expected.shape == (11, 9)
        assert np.array_equal(got, expected)


class TestRule:
    def test_constant_velocity(self):
        u = np.full((6, 6), 2.0)
        v = np.full((6, 6), -1.0)
        assert not interior_vorticity(u, v, 0.1, 0.1).any()

    def test_rigid_rotation(self):
        # u = -(y - 1/2), v = (x - 1/2) sampled on the staggered points
        n, h = 16, 1.0 / 16
        xe = np.arange(n) * h
        yc = (np.arange(n) + 0.5) * h
        xc = (np.arange(n) + 0.5) * h
        yn = np.arange(n) * h
        u = -(yc[None, :] - 0.5) + 0.0 * xe[:, None]
        v = (xc[:, None] - 0.5) + 0.0 * yn[None, :]
        om = interior_vorticity(u, v, h, h)
        assert np.abs(om - 2.0).max() <= 1e-12

    def test_taylor_green_checkerboard(self):
        u, v, _, meta = read_snapshot(os.path.join(FIX, "tg_t0.dat"))
        om = interior_vorticity(u, v, meta["hx"], meta["hy"])
        x, y = corner_coordinates(meta["nx"], meta["ny"], meta["hx"], meta["hy"])
        exact = 4 * np.pi * np.sin(2 * np.pi * x)[:, None] * np.sin(2 * np.pi * y)[None, :]
        # second-order agreement plus alternating-sign cell pattern
        assert np.abs(om - exact).max() <= 4 * np.pi * (2 * np.pi * meta["hx"]) ** 2
        qs = om[7, 7], om[7, 23], om[23, 7], om[23, 23]  # vortex centers
        assert qs[0] > 0 > qs[1] and qs[3] > 0 > qs[2]
