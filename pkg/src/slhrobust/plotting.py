"""Figures for frequency sweeps of the nominal resolvent."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_sweep(omegas, sigmas, path, margin=None, eta=None, title=None):
    """Plot ``sigma_min(i w I - A_n)`` against ``w`` and save it to ``path``.

    Horizontal reference lines mark the distance to instability and the
    perturbation bound when given.
    """
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.plot(omegas, sigmas, color="tab:blue", lw=1.6, label=r"$\sigma_{\min}(i\omega I - A_n)$")
    if margin is not None:
        ax.axhline(margin, color="tab:green", ls="--", lw=1.0, label=f"margin = {margin:.6g}")
    if eta is not None:
        ax.axhline(eta, color="tab:red", ls=":", lw=1.2, label=rf"$\eta$ = {eta:.6g}")
    ax.set_xlabel(r"$\omega$")
    ax.set_ylabel("smallest singular value")
    ax.set_ylim(bottom=0)
    if len(omegas) > 1:
        ax.set_xlim(min(omegas), max(omegas))
    if title:
        ax.set_title(title, loc="left")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
