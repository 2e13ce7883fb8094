import numpy as np
import pytest

from nsstab.adaptive import PlanCache, StepController, next_tau, step_variable
from nsstab.diagnostics import kinetic_energy
from nsstab.errors import ValidationError
from nsstab.grid import field_linf
from nsstab.problems import taylor_green
from nsstab.schemes import BDF2, CN1, CN2, VBDF2, VCN2, init_state, mass_coefficient, step
from nsstab.stokes import plan_solver

from conftest import periodic_grid


class TestController:
    def test_flat_energy_gives_tau_max(self):
        ctrl = StepController(0.1, 0.01, 4e5)
        assert next_tau(1.0, 1.0, 0.05, ctrl) == 0.1

    def test_zero_gain_gives_tau_max(self):
        ctrl = StepController(0.1, 0.01, 0.0)
        assert next_tau(0.3, 0.9, 0.05, ctrl) == 0.1

    def test_paper_constants_value(self):
        # slope -0.01 with eta = 4e5: tau = 0.1/sqrt(41)
        ctrl = StepController(0.1, 1.0 / 120.0, 4e5)
        got = next_tau(0.99, 1.0, 1.0, ctrl)
        assert got == pytest.approx(0.1 / np.sqrt(41.0), rel=1e-12)
        assert got == pytest.approx(1.5617376e-2, rel=1e-6)

    def test_bounds_and_monotonicity(self):
        ctrl = StepController(0.1, 1.0 / 120.0, 4e5)
        slopes = np.linspace(0.0, 0.2, 50)
        taus = [next_tau(s, 0.0, 1.0, ctrl) for s in slopes]
        assert all(ctrl.tau_min <= t <= ctrl.tau_max for t in taus)
        assert all(t2 <= t1 + 1e-15 for t1, t2 in zip(taus, taus[1:]))

    def test_invalid_controller(self):
        with pytest.raises(ValidationError):
            StepController(0.01, 0.1, 1.0)
        with pytest.raises(ValidationError):
            StepController(0.1, 0.01, -1.0)


class TestPlanCache:
    def test_memoizes_on_quantized_tau(self):
        g = periodic_grid(8, 8)
        cache = PlanCache(g, 0.001, VCN2)
        p1 = cache.get(0.01)
        p2 = cache.get(0.01 * (1 + 1e-14))
        assert p1 is p2
        p3 = cache.get(0.02)
        assert p3 is not p1

    def test_eviction(self):
        g = periodic_grid(8, 8)
        cache = PlanCache(g, 0.001, VCN2, maxsize=2)
        p1 = cache.get(0.01)
        cache.get(0.02)
        cache.get(0.03)
        assert cache.get(0.01) is not p1  # evicted and rebuilt


class TestDegeneration:
    @pytest.mark.parametrize("pair", [(VCN2, CN2), (VBDF2, BDF2)])
    def test_constant_tau_matches_uniform(self, pair):
        vs, us = pair
        prob = taylor_green(0.001)
        g = periodic_grid(32, 32)
        tau = 1e-2
        st_v = init_state(prob, g, vs, tau)
        st_u = init_state(prob, g, us, tau)
        cache = PlanCache(g, prob.nu, vs)
        plan = plan_solver(g, mass_coefficient(us, tau), prob.nu)
        worst = 0.0
        for _ in range(50):
            st_v = step_variable(st_v, tau, cache)
            st_u = step(st_u, plan, tau=tau)
            worst = max(worst, field_linf(st_v.Un - st_u.Un))
        assert worst <= 1e-12

    def test_ratio_one_coefficients(self):
        # (1 + r/2) = 3/2 and (1+2r)/(tau(1+r)) = 3/(2 tau) exactly at r = 1
        assert 1.0 + 0.5 * 1.0 == 1.5
        tau = 0.0123
        assert mass_coefficient(VBDF2, tau, r=1.0) == pytest.approx(
            mass_coefficient(BDF2, tau), rel=1e-15
        )


class TestVariableStep:
    def test_zero_state_stays_zero(self):
        from test_schemes import zero_problem

        prob = zero_problem()
        g = periodic_grid(8, 8)
        st = init_state(prob, g, VCN2, 1e-2)
        cache = PlanCache(g, prob.nu, VCN2)
        for tau in (1e-2, 2e-2, 5e-3):
            st = step_variable(st, tau, cache)
            assert field_linf(st.Un) == 0.0

    def test_requires_history(self):
        prob = taylor_green(0.001)
        g = periodic_grid(8, 8)
        st = init_state(prob, g, CN1, 1e-2)
        cache = PlanCache(g, prob.nu, VCN2)
        from dataclasses import replace

        st = replace(st, scheme=VCN2, Unm1=None)
        with pytest.raises(ValidationError, match="history"):
            step_variable(st, 1e-2, cache)

    def test_adaptive_taylor_green_dissipates(self):
        prob = taylor_green(0.001)
        g = periodic_grid(48, 48)
        ctrl = StepController(0.1, 1.0 / 120.0, 4e5)
        for scheme in (VCN2, VBDF2):
            st = init_state(prob, g, scheme, ctrl.tau_min)
            cache = PlanCache(g, prob.nu, scheme)
            e_prev2 = kinetic_energy(st.Unm1, g)
            e_prev = st.diag.energy
            T = 2.0
            while st.t < T - 1e-12:
                tau = min(next_tau(e_prev, e_prev2, st.tau_n, ctrl), T - st.t)
                st = step_variable(st, tau, cache)
                e_prev2, e_prev = e_prev, st.diag.energy
                assert e_prev <= e_prev2 + 1e-15
                assert ctrl.tau_min * 0.999 <= st.tau_n <= ctrl.tau_max
