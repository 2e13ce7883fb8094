"""Post-processing figures for nsstab runs: energy/step-size curves,
convergence plots, cavity centerlines, and vorticity contour panels."""

__version__ = "0.1.0"

from .io import SchemaError, read_convergence, read_manifest, read_snapshot, read_timeseries
from .plots import plot_centerline, plot_convergence, plot_energy, plot_tau, plot_vorticity
from .vorticity import interior_vorticity
