"""Figure rendering for the report path: landscape heatmaps and cost traces."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_landscape_heatmaps", "render_cost_traces"]


def render_landscape_heatmaps(rows, algorithms, outdir, prefix="landscape"):
    """One heatmap PNG per algorithm from landscape sweep rows. Returns the
    list of written paths."""
    nu_ratios = sorted({row["nu_ratio"] for row in rows})
    n_ratios = sorted({row["n_ratio"] for row in rows})
    lookup = {(row["nu_ratio"], row["n_ratio"]): row for row in rows}
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for alg in algorithms:
        grid = np.full((len(nu_ratios), len(n_ratios)), np.nan)
        for i, nr in enumerate(nu_ratios):
            for j, sr in enumerate(n_ratios):
                row = lookup.get((nr, sr))
                if row is not None:
                    grid[i, j] = row.get(f"{alg}_mean", np.nan)
        fig, ax = plt.subplots(figsize=(5, 4))
        im = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis",
                       vmin=0.0, vmax=max(1.0, np.nanmax(grid)))
        ax.set_xticks(range(len(n_ratios)), [f"{v:g}" for v in n_ratios])
        ax.set_yticks(range(len(nu_ratios)), [f"{v:g}" for v in nu_ratios])
        ax.set_xlabel("N2 / N1")
        ax.set_ylabel("nu2 / nu1")
        ax.set_title(f"{alg}: mean clustering error (%)")
        fig.colorbar(im, ax=ax)
        path = os.path.join(outdir, f"{prefix}_{alg}.png")
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths


def render_cost_traces(traces, path, title="Cost over iterations"):
    """Plot one or more cost traces (dict name -> sequence) to a PNG."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for name, trace in traces.items():
        ax.plot(range(len(trace)), trace, marker=".", label=name)
    ax.set_xlabel("step")
    ax.set_ylabel("cost")
    ax.set_title(title)
    if len(traces) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
