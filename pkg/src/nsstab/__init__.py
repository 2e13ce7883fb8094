"""nsstab: linear, unconditionally energy-stable incompressible Navier-Stokes
solvers on a staggered grid, with spectral/direct Stokes solves, an
energy-based adaptive stepper, and a benchmark CLI."""

__version__ = "0.1.0"

from .grid import (
    BoundaryKind,
    GridSpec,
    PressureField,
    VelocityField,
    build_grid,
    coords,
    dirichlet_xy,
    inner_product,
    norms,
    periodic_x_slip_y,
    periodic_xy,
    sample_function,
)
from .operators import StencilBank, b_apply, convection_parts, divergence, gradient, laplacian
from .stokes import (
    StokesPlan,
    plan_solver,
    solve_helmholtz,
    solve_poisson,
    solve_stokes,
    solve_stokes_many,
)
from .schemes import (
    BDF1,
    BDF2,
    CN1,
    CN2,
    VBDF2,
    VCN2,
    SimulationState,
    assemble_alpha_beta,
    init_state,
    solve_2x2,
    step,
)
from .adaptive import PlanCache, StepController, next_tau, step_variable
from .problems import (
    ProblemSpec,
    SteadyStateCriterion,
    kelvin_helmholtz,
    lid_driven_cavity,
    manufactured_flow,
    taylor_green,
)
from .diagnostics import (
    EnergyRecord,
    bdf2_energy,
    energy_identity_residual,
    error_norms,
    kinetic_energy,
    observed_order,
    vorticity,
)
from .errors import ConfigError, SolverError, ValidationError
