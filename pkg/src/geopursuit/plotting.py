"""Matplotlib figures rendered alongside the delimited run artifacts."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import UnsupportedDomainError


def _draw_domain(ax, domain):
    if domain.kind == "plane_minus_disks":
        for c, r in domain.disks:
            ax.add_patch(plt.Circle(c, r, facecolor="0.85", edgecolor="0.4",
                                    zorder=0))
    elif domain.kind == "convex_region":
        if domain.disk_radius is not None:
            ax.add_patch(plt.Circle(domain.center, domain.disk_radius,
                                    fill=False, edgecolor="0.4", zorder=0))
        else:
            poly = np.vstack([domain.polygon, domain.polygon[:1]])
            ax.plot(poly[:, 0], poly[:, 1], color="0.4", lw=1, zorder=0)


def emit_plot(trace, path):
    """Trajectory figure for planar domains: removed disks plus the pursuer
    and evader polylines with per-step markers."""
    domain = trace.domain
    if domain is None or not getattr(domain, "planar", False):
        raise UnsupportedDomainError("trajectory plots need a planar domain")
    P = np.asarray(trace.P_points, dtype=float)
    E = np.asarray(trace.E_points, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 6))
    _draw_domain(ax, domain)
    every = max(1, len(P) // 400)  # thin markers on very long runs
    ax.plot(P[:, 0], P[:, 1], "o-", color="tab:blue", ms=2.5, lw=0.9,
            markevery=every, label="pursuer")
    ax.plot(E[:, 0], E[:, 1], "s-", color="tab:red", ms=2.5, lw=0.9,
            markevery=every, label="evader")
    ax.plot(P[0, 0], P[0, 1], "*", color="tab:blue", ms=10)
    ax.plot(E[0, 0], E[0, 1], "*", color="tab:red", ms=10)
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def emit_series_plot(trace, path):
    """Separation and total-rotation series against time."""
    fig, axes = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    axes[0].plot(trace.t, trace.L, color="tab:green", lw=1)
    axes[0].set_ylabel("separation L")
    axes[1].plot(trace.t, trace.tau_P, color="tab:blue", lw=1, label="pursuer")
    axes[1].plot(trace.t, trace.tau_E, color="tab:red", lw=1, label="evader")
    axes[1].set_ylabel("total rotation")
    axes[1].set_xlabel("t")
    axes[1].legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_from_artifacts(positions_csv, domain, path):
    """Rebuild a trajectory figure from a positions CSV and a domain."""
    import csv as _csv

    with open(positions_csv, newline="") as fh:
        reader = _csv.reader(fh)
        next(reader)
        rows = [[float(x) for x in row] for row in reader]
    arr = np.asarray(rows, dtype=float)

    class _Shim:
        pass

    shim = _Shim()
    shim.domain = domain
    shim.P_points = arr[:, 1:3]
    shim.E_points = arr[:, 3:5]
    return emit_plot(shim, path)
