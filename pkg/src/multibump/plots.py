"""Figures rendered next to the CSV reports.

Everything draws to files through the Agg backend (no display), one
function per report type, nothing fancy: these are quick-look companions
to the delimited data, not publication graphics.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def condition_figure(ns, min_margins, path):
    """Minimal margin of the series inequality per dimension."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ns, min_margins, "o-", ms=3)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("n")
    ax.set_ylabel("min margin")
    ax.set_title("series inequality margin over the grid")
    _save(fig, path)


def balance_figure(ks, mu_R0, path):
    """Scaled radial offset mu*|R0| across the sweep."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(ks, np.abs(mu_R0), "o-")
    ax.set_xlabel("k")
    ax.set_ylabel("mu |R0|")
    ax.set_title("balanced radial offset")
    _save(fig, path)


def spectrum_figure(curves, path):
    """Scaled block determinant D_nu vs frequency, one curve per k."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, nu, vals in curves:
        ax.semilogy(nu, vals, ".-", ms=3, label=f"k={k}")
    ax.set_xlabel("nu / k")
    ax.set_ylabel("D_nu / (nu_eff^2 k^(2n-4))")
    ax.set_title("scaled frequency determinants")
    ax.legend()
    _save(fig, path)


def trace_figure(trace, path):
    """Step size per fixed-point iteration (semilog)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    its = [t["iter"] for t in trace]
    ax.semilogy(its, [max(t["step"], 1e-300) for t in trace], "o-", label="step")
    ax.semilogy(its, [max(t["xi_norm"], 1e-300) for t in trace], "s--",
                ms=3, label="xi norm")
    ax.set_xlabel("iteration")
    ax.legend()
    ax.set_title("fixed-point iteration")
    _save(fig, path)


def nondegen_figure(curves, path):
    """Scaled -det_hat across frequencies, one curve per k."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, nu, vals in curves:
        ax.semilogy(nu, vals, ".-", ms=3, label=f"k={k}")
    ax.set_xlabel("nu / k")
    ax.set_ylabel("-det_hat / (mu^(-3m-2) nu_eff^2)")
    ax.set_title("scaled non-degeneracy determinants")
    ax.legend()
    _save(fig, path)


def error_cloud_figure(dist, vals, d_half, path):
    """Sampled |E|/weight against distance to the nearest center."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(np.maximum(dist, 1e-12), np.maximum(vals, 1e-300), ".", ms=2,
              alpha=0.5)
    ax.axvline(d_half, color="k", lw=0.8, ls="--")
    ax.set_xlabel("distance to nearest center")
    ax.set_ylabel("|E| / weight")
    ax.set_title("weighted error samples (dashed: cell half-width)")
    _save(fig, path)
