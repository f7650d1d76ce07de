"""Figures written next to the CSV reports (non-interactive Agg backend)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (7.0, 4.3),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "lines.linewidth": 1.4,
    "savefig.dpi": 120,
    "savefig.bbox": "tight",
}


def _save(fig, path):
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_diagnostics(records, path):
    t = np.array([r.t for r in records])
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(10, 6.5), sharex=True)
        ax = axes[0, 0]
        ax.plot(t, [r.min_mu for r in records], label="min mu")
        ax.plot(t, [r.max_mu for r in records], label="max mu")
        ax.plot(t, [r.min_rho for r in records], "--", label="min rho")
        ax.plot(t, [r.max_rho for r in records], "--", label="max rho")
        ax.set_title("extrema")
        ax.legend(fontsize=8)
        ax = axes[0, 1]
        ax.plot(t, [r.weighted_mu_energy for r in records], label="weighted mu energy")
        ax.plot(t, [r.cum_grad_mu for r in records], label="cumulative |grad mu|^2")
        ax.set_title("first estimate")
        ax.legend(fontsize=8)
        ax = axes[1, 0]
        for name in ("conservation_drift", "lyapunov_residual"):
            y = np.array([getattr(r, name) for r in records])
            ax.semilogy(t, np.maximum(y, 1e-300), label=name.replace("_", " "))
        ax.set_title("identity residuals")
        ax.set_xlabel("t")
        ax.legend(fontsize=8)
        ax = axes[1, 1]
        for name in ("dtrho_l2", "grad_mu_l2", "mu_oscillation"):
            y = np.array([getattr(r, name) for r in records])
            ax.semilogy(t, np.maximum(y, 1e-300), label=name.replace("_", " "))
        ax.set_title("decay probes")
        ax.set_xlabel("t")
        ax.legend(fontsize=8)
        return _save(fig, path)


def plot_fields(traj, path, max_curves: int = 6):
    grid = traj.grid
    states = traj.states
    with plt.rc_context(STYLE):
        if grid.dim == 1:
            x = grid.axes[0]
            pick = np.unique(np.linspace(0, len(states) - 1, min(max_curves, len(states))).astype(int))
            fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 4))
            colors = plt.cm.viridis(np.linspace(0, 1, len(pick)))
            for c, i in zip(colors, pick):
                a1.plot(x, states[i].mu, color=c, label=f"t={states[i].t:.3g}")
                a2.plot(x, states[i].rho, color=c)
            a1.set_title("mu")
            a2.set_title("rho")
            a1.set_xlabel("x")
            a2.set_xlabel("x")
            a1.legend(fontsize=8)
        else:
            fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 4))
            extent = [0, grid.lengths[1], 0, grid.lengths[0]]
            for ax, name in ((a1, "mu"), (a2, "rho")):
                im = ax.imshow(getattr(traj.final, name), origin="lower", extent=extent)
                ax.set_title(f"{name} at t={traj.final.t:.3g}")
                ax.grid(False)
                fig.colorbar(im, ax=ax)
        return _save(fig, path)


def plot_degiorgi(report, path):
    j = np.arange(len(report.k_levels))
    with plt.rc_context(STYLE):
        fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 4))
        a1.plot(j, report.k_levels, "o-", ms=3)
        a1.axhline(report.sup_mu_observed, color="k", ls=":", label="sup mu observed")
        a1.axhline(2 * report.M, color="r", ls="--", label="2M")
        a1.set_xlabel("j")
        a1.set_title("levels k_j")
        a1.legend(fontsize=8)
        a2.plot(j, report.S_levels, "o-", ms=3, label="S_j")
        a2.plot(j, report.triple_norms, "s-", ms=3, label="triple norm of (mu-k_j)+")
        a2.set_xlabel("j")
        a2.set_title("level-set norms")
        a2.legend(fontsize=8)
        return _save(fig, path)


def plot_oracle(times, pde_mu, pde_rho, oracle_mu, oracle_rho, path):
    with plt.rc_context(STYLE):
        fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 4))
        a1.plot(times, oracle_mu, "k-", label="oracle")
        a1.plot(times, pde_mu, "--", label="PDE solver")
        a1.set_title("mu")
        a2.plot(times, oracle_rho, "k-")
        a2.plot(times, pde_rho, "--")
        a2.set_title("rho")
        for ax in (a1, a2):
            ax.set_xlabel("t")
        a1.legend(fontsize=8)
        return _save(fig, path)


def plot_sweep(axis, values, columns: dict, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, ys in columns.items():
            ys = np.array(ys, dtype=float)
            ok = np.isfinite(ys) & (ys > 0)
            if ok.any():
                ax.loglog(np.asarray(values, dtype=float)[ok], ys[ok], "o-", label=name)
        ax.set_xlabel(axis)
        ax.legend(fontsize=8)
        return _save(fig, path)
