"""Figure rendering for the report path.

Renders the per-grid-point singular value profiles and the superoptimal
levels to image files next to the delimited trace output.  Batch use only,
hence the non-interactive backend.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_FIGSIZE = (7.0, 4.4)
_DPI = 150


def save_profile_figure(theta, sv_phi, sv_resid, levels, path) -> None:
    """Singular value profiles of the symbol and of the residual.

    ``sv_phi`` and ``sv_resid`` have shape (T, k); ``levels`` are drawn as
    dashed horizontal lines through the residual panel.
    """
    theta = np.asarray(theta)
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=_FIGSIZE)
    for j in range(sv_phi.shape[1]):
        axes[0].plot(theta, sv_phi[:, j], lw=1.0, label=rf"$s_{{{j}}}$")
    axes[0].set_ylabel("singular values of the symbol")
    axes[0].legend(loc="upper right", fontsize=8, ncol=min(4, sv_phi.shape[1]))
    for j in range(sv_resid.shape[1]):
        axes[1].plot(theta, sv_resid[:, j], lw=1.0)
    for t in levels:
        axes[1].axhline(t, color="gray", ls="--", lw=0.8)
    axes[1].set_ylabel("residual profile")
    axes[1].set_xlabel(r"$\theta$")
    axes[1].set_xlim(theta[0], theta[-1])
    for ax in axes:
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_levels_figure(t, path) -> None:
    """Superoptimal singular values against their index."""
    t = np.asarray(t, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.step(np.arange(t.size), t, where="mid", marker="o", ms=4)
    ax.set_xlabel("j")
    ax.set_ylabel(r"$t_j$")
    ax.set_xticks(np.arange(t.size))
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
