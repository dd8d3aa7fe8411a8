"""Figure rendering for the CLI report paths (PNG next to the CSVs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_bifurcation(samples, n, b, path):
    """Normalised bifurcation parameter against the asymmetry."""
    s = [r.s for r in samples]
    eb = [r.eta_bar for r in samples]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(s, eb, lw=1.2)
    ax.axhline(1.0, color="0.6", lw=0.6, ls="--")
    ax.set_xlabel("s")
    ax.set_ylabel(r"$\bar\eta(s)$")
    ax.set_title(f"n = {n}, b = {b}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_trajectory(traj, path):
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5.5, 5), sharex=True)
    positive = traj.sup_dev > 0
    if np.any(positive):
        ax1.semilogy(traj.times[positive], traj.sup_dev[positive], lw=1.0)
    ax1.set_ylabel(r"$\|P_0 u\|_\infty$")
    drift = np.abs(traj.wvol - traj.wvol[0]) / abs(traj.wvol[0])
    ax2.plot(traj.times, drift, lw=1.0)
    ax2.set_ylabel("relative WVol drift")
    ax2.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_profile(z, rho, path, title=None):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(z, rho, lw=1.2)
    ax.set_xlabel("z")
    ax.set_ylabel(r"$\rho(z)$")
    ax.set_ylim(bottom=0.0)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_stability_table(rows, path):
    """Verdict map over (n, b)."""
    ns = sorted({r.n for r in rows})
    bs = sorted({r.b for r in rows})
    grid = np.full((len(bs), len(ns)), np.nan)
    for r in rows:
        grid[bs.index(r.b), ns.index(r.n)] = 1.0 if r.stable else 0.0
    fig, ax = plt.subplots(figsize=(7, 3.5))
    im = ax.imshow(grid, origin="lower", aspect="auto", cmap="RdYlGn",
                   vmin=0, vmax=1,
                   extent=(ns[0] - 0.5, ns[-1] + 0.5, bs[0] - 0.5, bs[-1] + 0.5))
    ax.set_xlabel("n")
    ax.set_ylabel("b")
    ax.set_title("stable (green) vs unstable (red)")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
