"""Figures for sweep results: per-target error waterfalls and min-time histograms."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

BOUND_COLOR = "tab:green"


def _finish(fig, ax, path, title):
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def waterfall_figure(records, path, bound=None, cutoff=None, title=None):
    """Fidelity error against total time, one line per target."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for rec in records:
        if rec.times:
            ax.semilogy(rec.times, [max(e, 1e-16) for e in rec.errors], lw=0.8, alpha=0.8)
    if bound is not None:
        ax.axvline(bound, color=BOUND_COLOR, lw=1.5, label=f"analytic bound {bound:.4f}")
    if cutoff is not None:
        ax.axhline(cutoff, color="k", ls=":", lw=1, label=f"cutoff {cutoff:g}")
    ax.set_xlabel("total time T")
    ax.set_ylabel("fidelity error 1 - F")
    if bound is not None or cutoff is not None:
        ax.legend(fontsize=8, loc="lower left")
    _finish(fig, ax, path, title)


def histogram_figure(records, path, bound=None, bins=None, title=None):
    """Distribution of the minimum time per target; unconverged targets are left out."""
    times = [r.min_time for r in records if r.min_time is not None]
    fig, ax = plt.subplots(figsize=(6, 4))
    if times:
        ax.hist(times, bins=bins or max(5, min(30, len(times))), color="tab:blue", alpha=0.8)
    if bound is not None:
        ax.axvline(bound, color=BOUND_COLOR, lw=2, label=f"analytic bound {bound:.4f}")
        ax.legend(fontsize=8)
    ax.set_xlabel("minimum time")
    ax.set_ylabel("targets")
    _finish(fig, ax, path, title)
