"""Figure rendering for reports: every plot goes straight to a file."""

from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_benchmark_figure(report, path: str):
    """Grouped bars of mean suggested vs inertial error per sample length."""
    plt = _plt()
    ns = [r.n for r in report.rows]
    x = np.arange(len(ns))
    width = 0.38
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.bar(x - width / 2, [r.mean_suggested for r in report.rows], width,
           label="suggested", color="#2a6fdb")
    ax.bar(x + width / 2, [r.mean_inertial for r in report.rows], width,
           label="inertial", color="#b0b0b0")
    ax.set_xticks(x, [str(n) for n in ns])
    ax.set_xlabel("sample length n")
    ax.set_ylabel("mean |error|")
    ax.set_title(f"{report.process.get('kind', '?')}: prediction error over "
                 f"{report.rows[0].runs if report.rows else 0} runs")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_series_figure(values, path: str, title: str | None = None):
    plt = _plt()
    values = np.asarray(values, dtype=float)
    fig, ax = plt.subplots(figsize=(7.0, 3.0))
    ax.plot(np.arange(1, values.size + 1), values, lw=0.9, color="#2a6fdb")
    ax.set_xlabel("i")
    ax.set_ylabel("x_i")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_density_figure(estimator, history, path: str, grid: int = 512):
    """Conditional density of the next value given the history."""
    plt = _plt()
    part = estimator.partition
    eps = part.span / (2 * grid)
    xs = np.linspace(part.lo + eps, part.hi - eps, grid)
    ys = [estimator.cond_density(history, float(x)) for x in xs]
    fig, ax = plt.subplots(figsize=(6.0, 3.4))
    ax.plot(xs, ys, lw=1.1, color="#2a6fdb")
    ax.fill_between(xs, ys, alpha=0.15, color="#2a6fdb")
    ax.set_xlabel("next value")
    ax.set_ylabel("conditional density")
    ax.set_xlim(part.lo, part.hi)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
