"""Waveform rendering for simulation traces (matplotlib, file output only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import Trace


def plot_trace(trace: Trace, path: str, title: str | None = None) -> None:
    """Stacked step plot, one lane per variable, like a logic-analyzer view."""
    names = trace.order.names
    steps = len(trace.rows)
    fig_height = max(1.5, 0.55 * len(names) + 0.8)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.35 * steps + 1.5), fig_height))
    xs = list(range(steps + 1))
    for lane, name in enumerate(names):
        base = (len(names) - 1 - lane) * 1.5
        col = trace.column(name)
        ys = [base + 0.0] * (steps + 1)
        for i, v in enumerate(col):
            ys[i] = base + (1.0 if v else 0.0)
        ys[steps] = ys[steps - 1] if steps else base
        ax.step(xs, ys, where="post", linewidth=1.2)
        ax.text(-0.4, base + 0.5, name, ha="right", va="center", fontsize=8)
    ax.set_xlim(-0.5, steps + 0.5)
    ax.set_ylim(-0.5, 1.5 * len(names) + 0.5)
    ax.set_yticks([])
    ax.set_xlabel("cycle")
    if title:
        ax.set_title(title)
    for spine in ("left", "right", "top"):
        ax.spines[spine].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
