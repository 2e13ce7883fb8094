"""Paper-style figures from solver outputs.

Every plotted quantity comes verbatim from the CSV / snapshot inputs; the
single exception is the corner-difference vorticity (see vorticity.py).
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    SchemaError,
    read_convergence,
    read_snapshot,
    read_timeseries,
    sibling_manifest,
)
from .vorticity import corner_coordinates, interior_vorticity


def _run_label(ts_path, manifest):
    if manifest is None:
        return os.path.basename(os.path.dirname(os.path.abspath(ts_path))) or ts_path
    sch = manifest.get("config", {}).get("scheme", {})
    kind = sch.get("kind", "?")
    if sch.get("tau") is not None:
        return f"{kind}, tau = {sch['tau']:g}"
    if sch.get("tau_max") is not None:
        return (
            f"{kind}, tau in [{sch.get('tau_min', float('nan')):g}, "
            f"{sch['tau_max']:g}]"
        )
    return kind


def plot_energy(ts_paths, out_path, nu=None, title="Discrete kinetic energy"):
    """Overlay E(t) curves; with nu, add the exact decay reference dashed."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    t_max = 0.0
    for path in ts_paths:
        data = read_timeseries(path, ("t", "E"))
        ax.plot(data["t"], data["E"], label=_run_label(path, sibling_manifest(path)))
        t_max = max(t_max, float(data["t"][-1]))
    if nu is not None:
        t = np.linspace(0.0, t_max, 400)
        ax.plot(
            t,
            0.25 * np.exp(-16 * np.pi**2 * nu * t),
            "k--",
            label="exact  $e^{-16\\pi^2 \\nu t}/4$",
        )
    ax.set_xlabel("t")
    ax.set_ylabel("E")
    ax.set_title(title)
    ax.legend()
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path


def plot_tau(ts_paths, out_path, title="Accepted step sizes"):
    """Step size against time for one or more runs."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for path in ts_paths:
        data = read_timeseries(path, ("t", "tau"))
        ax.plot(data["t"], data["tau"], label=_run_label(path, sibling_manifest(path)))
    ax.set_xlabel("t")
    ax.set_ylabel("tau")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.legend()
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path


def endpoint_slope(taus, errors):
    return float(np.log(errors[0] / errors[-1]) / np.log(taus[0] / taus[-1]))


def plot_convergence(table_path, out_path, column="u_linf", title="Temporal convergence"):
    """Log-log error vs step size with a slope-2 guide, one series per scheme.

    Returns (out_path, {scheme: endpoint slope}).
    """
    rows = read_convergence(table_path)
    if len(rows) < 2:
        raise SchemaError(f"{table_path}: need at least two rows for a convergence plot")
    schemes = []
    for r in rows:
        if r["scheme"] not in schemes:
            schemes.append(r["scheme"])
    fig, ax = plt.subplots(figsize=(6.4, 4.6))
    slopes = {}
    for scheme in schemes:
        sub = [r for r in rows if r["scheme"] == scheme]
        taus = np.array([r["tau"] for r in sub])
        errs = np.array([r[column] for r in sub])
        if len(sub) >= 2:
            slopes[scheme] = endpoint_slope(taus, errs)
            label = f"{scheme} (slope {slopes[scheme]:.2f})"
        else:
            label = scheme
        ax.loglog(taus, errs, "o-", label=label)
    # slope-2 guide anchored at the first series' first point
    t0 = np.array([r["tau"] for r in rows if r["scheme"] == schemes[0]])
    e0 = [r[column] for r in rows if r["scheme"] == schemes[0]][0]
    guide = e0 * (t0 / t0[0]) ** 2
    ax.loglog(t0, guide, "k:", label="slope 2")
    ax.set_xlabel("tau")
    ax.set_ylabel(column)
    ax.set_title(title)
    ax.legend()
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path, slopes


def plot_centerline(snapshot_path, out_path, title="Cavity centerline velocities"):
    """u on the vertical centerline and v on the horizontal centerline."""
    u, v, _, meta = read_snapshot(snapshot_path)
    nx, ny, hx, hy = meta["nx"], meta["ny"], meta["hx"], meta["hy"]
    if nx % 2 or ny % 2:
        raise SchemaError("centerline plots need even cell counts (exact midline columns)")
    y = (np.arange(ny) + 0.5) * hy
    x = (np.arange(nx) + 0.5) * hx
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.6, 4.2))
    ax1.plot(u[nx // 2, :], y)
    ax1.set_xlabel("u(0.5, y)")
    ax1.set_ylabel("y")
    ax2.plot(x, v[:, ny // 2])
    ax2.set_xlabel("x")
    ax2.set_ylabel("v(x, 0.5)")
    fig.suptitle(f"{title} (t = {meta['t']:g})")
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path


def plot_vorticity(snapshot_paths, out_path, ncols=2, title="Vorticity"):
    """Filled-contour vorticity panels, one per snapshot, color scale
    symmetric about zero across all panels."""
    if not snapshot_paths:
        raise SchemaError("no snapshots given")
    fields = []
    for path in snapshot_paths:
        u, v, _, meta = read_snapshot(path)
        om = interior_vorticity(u, v, meta["hx"], meta["hy"])
        fields.append((om, meta))
    vmax = max(float(np.abs(om).max()) for om, _ in fields)
    if vmax == 0.0:
        vmax = 1.0  # uniform zero field still renders a flat panel
    n = len(fields)
    ncols = max(1, min(ncols, n))
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.8 * ncols, 4.2 * nrows), squeeze=False
    )
    levels = np.linspace(-vmax, vmax, 21)
    for i, (om, meta) in enumerate(fields):
        ax = axes[i // ncols][i % ncols]
        x, y = corner_coordinates(meta["nx"], meta["ny"], meta["hx"], meta["hy"])
        cs = ax.contourf(x, y, om.T, levels=levels, cmap="RdBu_r")
        ax.set_title(f"t = {meta['t']:g}")
        ax.set_aspect("equal")
    for j in range(n, nrows * ncols):
        axes[j // ncols][j % ncols].axis("off")
    fig.colorbar(cs, ax=[a for row in axes for a in row], shrink=0.85)
    fig.suptitle(title)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path
