"""Variable-step integrators and the energy-based step-size controller.

The controller maps the discrete energy slope between adjacent accepted
steps to the next step size,

    tau_{n+1} = max(tau_min, tau_max / sqrt(1 + eta * ((E_n - E_{n-1}) / tau_n)^2)),

so the step grows toward tau_max as the energy curve flattens.  The
variable-step schemes replace the uniform extrapolations by ratio-weighted
ones (r = tau_{n+1} / tau_n):

    vcn2:   Ub = (1 + r/2) U^n - (r/2) U^{n-1},        c = 2 / tau
    vbdf2:  Ub = (1 + r) U^n - r U^{n-1},
            c = (1 + 2r) / (tau (1 + r)),
            M3 = c U^n + r^2 / (tau (1 + r)) (U^n - U^{n-1}) + force

and degenerate to cn2/bdf2 coefficients exactly at r = 1.  Stokes plans are
memoized on the quantized step size so repeated near-identical steps reuse
factorizations.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .schemes import VBDF2, VCN2, _run_step, mass_coefficient
from .stokes import plan_solver

PLAN_QUANTUM_REL = 1e-12


@dataclass(frozen=True)
class StepController:
    tau_max: float
    tau_min: float
    eta: float

    def __post_init__(self):
        if not (0 < self.tau_min <= self.tau_max):
            raise ValidationError(
                f"need 0 < tau_min <= tau_max, got [{self.tau_min}, {self.tau_max}]"
            )
        if self.eta < 0:
            raise ValidationError(f"adaptivity gain eta must be nonnegative, got {self.eta}")


def next_tau(E_n, E_nm1, tau_n, ctrl):
    """Next step size from the energy slope over the last accepted step."""
    if tau_n <= 0:
        raise ValidationError(f"tau_n must be positive, got {tau_n}")
    slope = (E_n - E_nm1) / tau_n
    return max(ctrl.tau_min, ctrl.tau_max / np.sqrt(1.0 + ctrl.eta * slope * slope))


class PlanCache:
    """LRU cache of Stokes plans keyed by quantized step size.

    Concurrent reads are safe; inserts are serialized by a lock.
    """

    def __init__(self, grid, nu, scheme, maxsize=64):
        self.grid = grid
        self.nu = nu
        self.scheme = scheme
        self.maxsize = maxsize
        self._plans = OrderedDict()
        self._lock = threading.Lock()

    def _key(self, tau, r):
        # quantize the mass coefficient to a relative 1e-12 grid
        c = mass_coefficient(self.scheme, tau, r)
        return round(c, 11 - int(np.floor(np.log10(c))))

    def get(self, tau, r=1.0):
        key = self._key(tau, r)
        with self._lock:
            plan = self._plans.get(key)
            if plan is not None:
                self._plans.move_to_end(key)
                return plan
        plan = plan_solver(self.grid, mass_coefficient(self.scheme, tau, r), self.nu)
        with self._lock:
            self._plans[key] = plan
            self._plans.move_to_end(key)
            while len(self._plans) > self.maxsize:
                self._plans.popitem(last=False)
        return plan


def step_variable(state, tau_next, cache, forcing=None, eps_det=None):
    """Advance one variable step of vcn2/vbdf2 with step size tau_next."""
    scheme = state.scheme
    if scheme not in (VCN2, VBDF2):
        raise ValidationError(f"step_variable handles vcn2/vbdf2, got {scheme!r}")
    if state.Unm1 is None:
        raise ValidationError(f"{scheme} needs two history levels; run the startup step first")
    if tau_next <= 0:
        raise ValidationError(f"step size must be positive, got {tau_next}")
    r = tau_next / state.tau_n

    if scheme == VCN2:
        Ubar = (1.0 + 0.5 * r) * state.Un - (0.5 * r) * state.Unm1
        M3 = (2.0 / tau_next) * state.Un
    else:
        Ubar = (1.0 + r) * state.Un - r * state.Unm1
        c = mass_coefficient(VBDF2, tau_next, r)
        w = r * r / (tau_next * (1.0 + r))
        M3 = c * state.Un + w * (state.Un - state.Unm1)

    plan = cache.get(tau_next, r)
    return _run_step(state, plan, tau_next, scheme, Ubar, M3, forcing, eps_det)
