"""Figure rendering for the report paths (written next to the CSV output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_simulation(traj, R, args, freqs, path):
    """Three stacked panels: phase raster, population frequencies, synchrony."""
    fig, axes = plt.subplots(3, 1, figsize=(9, 7), sharex=True,
                             gridspec_kw={"height_ratios": [2, 1, 1]})
    t = traj.times
    m, n = traj.params.M, traj.params.N

    ax = axes[0]
    im = ax.imshow(traj.states.T, aspect="auto", origin="lower", cmap="gray_r",
                   extent=[t[0], t[-1], 0.5, m * n + 0.5],
                   vmin=0, vmax=2 * np.pi, interpolation="nearest")
    for s in range(1, m):
        ax.axhline(s * n + 0.5, color="tab:red", lw=0.6)
    ax.set_ylabel("oscillator")
    fig.colorbar(im, ax=ax, label=r"$\theta$", pad=0.01)

    ax = axes[1]
    for s in range(m):
        ax.plot(t, freqs[:, s], lw=0.9, label=f"pop {s + 1}")
    ax.set_ylabel("frequency")
    ax.legend(loc="upper right", fontsize=8, ncol=m)

    ax = axes[2]
    for s in range(m):
        ax.plot(t, R[:, s], lw=0.9)
    ax.set_ylim(-0.05, 1.05)
    ax.set_ylabel(r"$R_\sigma$")
    ax.set_xlabel("t")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_regions(rows, path):
    """Condition-window maps in the (r, K) plane, one panel per alpha2."""
    alpha2s = sorted({row["alpha2"] for row in rows})
    rs = np.array(sorted({row["r"] for row in rows}))
    ks = np.array(sorted({row["K"] for row in rows}))
    ncols = min(len(alpha2s), 4)
    nrows = (len(alpha2s) + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.2 * ncols, 3.0 * nrows),
                             squeeze=False)
    idx = {(row["alpha2"], row["r"], row["K"]): row["report"].window for row in rows}
    for i, a2 in enumerate(alpha2s):
        ax = axes[i // ncols][i % ncols]
        grid = np.zeros((len(ks), len(rs)))
        for j, r in enumerate(rs):
            for l, k in enumerate(ks):
                grid[l, j] = idx[(a2, r, k)]
        ax.imshow(grid, origin="lower", aspect="auto", cmap="Greens",
                  extent=[rs[0], rs[-1], ks[0], ks[-1]], vmin=0, vmax=1)
        ax.set_title(f"alpha2 = {a2:.4f}", fontsize=9)
        ax.set_xlabel("r")
        ax.set_ylabel("K")
    for i in range(len(alpha2s), nrows * ncols):
        axes[i // ncols][i % ncols].axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_potential_map(rows, path):
    """Scatter heat maps of V, Q, R and the two branch drifts over the region."""
    p1 = np.array([r["psi1"] for r in rows])
    p2 = np.array([r["psi2"] for r in rows])
    panels = [
        ("V", [r["V"] for r in rows], "viridis"),
        ("Q", [r["Q"] for r in rows], "viridis"),
        ("R", [np.nan if r["R"] is None else r["R"] for r in rows], "coolwarm"),
        ("vdot DpsiS", [r["vdot_DpS"] for r in rows], "coolwarm"),
    ]
    fig, axes = plt.subplots(2, 2, figsize=(9, 8))
    for ax, (name, vals, cmap) in zip(axes.ravel(), panels):
        vals = np.asarray(vals, dtype=float)
        if name in ("R", "vdot DpsiS"):
            lim = np.nanmax(np.abs(vals)) or 1.0
            sc = ax.scatter(p1, p2, c=vals, s=2, cmap=cmap, vmin=-lim, vmax=lim)
        else:
            sc = ax.scatter(p1, p2, c=vals, s=2, cmap=cmap)
        ax.plot([0, 2 * np.pi, 2 * np.pi, 0], [0, 2 * np.pi, 2 * np.pi, 0],
                color="k", lw=0.7)
        ax.set_title(name, fontsize=10)
        ax.set_xlabel(r"$\psi_1$")
        ax.set_ylabel(r"$\psi_2$")
        fig.colorbar(sc, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_scaling(result, path):
    """Mean residence time against ln(1/eta) with the fitted line."""
    pts = [(p.eta, p.mean_residence) for p in result.points if p.mean_residence is not None]
    fig, ax = plt.subplots(figsize=(5, 4))
    if pts:
        x = np.log(1.0 / np.array([e for e, _ in pts]))
        y = np.array([m for _, m in pts])
        ax.plot(x, y, "o", color="tab:blue")
        if result.slope is not None:
            xs = np.linspace(x.min(), x.max(), 50)
            ax.plot(xs, result.slope * xs + result.intercept, "-", color="tab:orange",
                    label=f"fit, R^2 = {result.r_squared:.4f}")
            ax.legend(fontsize=8)
    ax.set_xlabel(r"$\ln(1/\eta)$")
    ax.set_ylabel("mean residence time")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
