"""Figure rendering for sweep and optimize tables.

Each table written by the CLI gets a companion PNG on the same stem:
sweep plots put the swept axis on x with one line per (engine, metric)
pair and error bars on simulated points; optimize plots show the
achieved sum throughput versus the normalized arrival rate, one line per
family.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .sweeps import OptimizeRow, SweepRow  # noqa: E402

_FIGSIZE = (7.0, 4.5)


def render_sweep_plot(rows: Sequence[SweepRow], path: str, title: str = "",
                      log_x: bool = False) -> None:
    groups: dict[tuple[str, str], list[SweepRow]] = defaultdict(list)
    for row in rows:
        if row.value is not None:
            groups[(row.metric_name, row.engine)].append(row)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for (metric, engine), pts in sorted(groups.items()):
        pts = sorted(pts, key=lambda r: r.axis_value)
        xs = [p.axis_value for p in pts]
        ys = [p.value for p in pts]
        label = f"{metric} ({engine})"
        if engine == "simulate":
            errs = [(p.stderr or 0.0) for p in pts]
            ax.errorbar(xs, ys, yerr=errs, fmt="o", ms=3.5, capsize=2, label=label)
        else:
            ax.plot(xs, ys, "-", lw=1.5, label=label)
    if log_x:
        ax.set_xscale("log")
    if rows:
        ax.set_xlabel(rows[0].axis_name)
    ax.set_ylabel("packets/slot")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_optimize_plot(rows: Sequence[OptimizeRow], path: str, title: str = "") -> None:
    groups: dict[str, list[OptimizeRow]] = defaultdict(list)
    for row in rows:
        if row.feasible and row.sum_throughput is not None:
            groups[row.family].append(row)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for family, pts in sorted(groups.items()):
        pts = sorted(pts, key=lambda r: r.lambda_frac)
        ax.plot([p.lambda_frac for p in pts], [p.sum_throughput for p in pts],
                "-o", ms=3, lw=1.4, label=family or "base")
    ax.set_xlabel("normalized primary arrival rate")
    ax.set_ylabel("optimized secondary sum throughput")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
