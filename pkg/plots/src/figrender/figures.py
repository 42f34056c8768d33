"""The four figure kinds drawn from run artifacts."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib import pyplot as plt

from .schemas import (
    DENSITY_COLUMNS,
    GROUPED_COLUMNS,
    SUMMARY_COLUMNS,
    SchemaError,
    as_float,
    read_csv,
    read_trace,
)

# identical inputs must give identical bytes: pin the writer metadata
SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": "figrender"}}

DENSITY_LABELS = {
    "frac_sparse": "sparse",
    "frac_mid": "mid-dense",
    "frac_dense": "dense",
    "frac_very": "very dense",
}


def _save(fig, out_path: str) -> None:
    fig.savefig(out_path, **SAVE_KWARGS)
    plt.close(fig)


def summary_bars(in_paths: list[str], out_path: str, title: str = "") -> None:
    """Grouped return bars with error bars, plus the perf/cost breakdown."""
    rows = []
    for p in in_paths:
        rows += [(p, r) for r in read_csv(p, SUMMARY_COLUMNS)]
    scenarios = sorted({r["scenario"] for _, r in rows})
    methods = sorted({r["method"] for _, r in rows})
    x = np.arange(len(scenarios))
    width = 0.8 / max(len(methods), 1)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    for mi, method in enumerate(methods):
        means, errs, perfs, costs = [], [], [], []
        for sc in scenarios:
            match = [r for p, r in rows if r["method"] == method and r["scenario"] == sc]
            if match:
                p, r = in_paths[0], match[0]
                means.append(as_float(r, "mean_return", p))
                errs.append(as_float(r, "stderr", p))
                perfs.append(as_float(r, "mean_perf", p))
                costs.append(as_float(r, "mean_cost", p))
            else:
                means.append(np.nan)
                errs.append(0.0)
                perfs.append(np.nan)
                costs.append(np.nan)
        offs = x + (mi - (len(methods) - 1) / 2) * width
        ax1.bar(offs, means, width, yerr=errs, capsize=3, label=method)
        ax2.bar(offs, perfs, width, label=f"{method} perf")
        ax2.bar(offs, [-c for c in costs], width, bottom=perfs, alpha=0.55,
                label=f"{method} cost")
    ax1.set_xticks(x, scenarios, rotation=20)
    ax1.set_ylabel("mean episode return")
    ax1.legend(fontsize=8)
    ax2.set_xticks(x, scenarios, rotation=20)
    ax2.set_ylabel("performance / resource components")
    ax2.legend(fontsize=7)
    fig.suptitle(title or "Method comparison")
    fig.tight_layout()
    _save(fig, out_path)


def density_series(in_paths: list[str], out_path: str, title: str = "") -> None:
    """Stacked area of the four density-band fractions over time."""
    fig, axes = plt.subplots(
        1, len(in_paths), figsize=(5.5 * len(in_paths), 4), squeeze=False
    )
    for ax, path in zip(axes[0], in_paths):
        rows = read_csv(path, DENSITY_COLUMNS)
        t = [as_float(r, "t", path) for r in rows]
        stacks = [[as_float(r, c, path) for r in rows] for c in DENSITY_COLUMNS[1:]]
        total = np.sum(stacks, axis=0)
        if not np.allclose(total, 1.0, atol=1e-6):
            raise SchemaError(f"{path}: density fractions do not sum to 1")
        ax.stackplot(t, *stacks, labels=[DENSITY_LABELS[c] for c in DENSITY_COLUMNS[1:]],
                     alpha=0.85)
        ax.set_xlabel("time step")
        ax.set_ylabel("fraction of episodes")
        ax.set_ylim(0, 1)
        ax.legend(loc="upper right", fontsize=8)
        ax.set_title(path.rsplit("/", 1)[-1])
    fig.suptitle(title or "Topology density over time")
    fig.tight_layout()
    _save(fig, out_path)


def centrality_series(in_paths: list[str], out_path: str, title: str = "") -> None:
    """Per-vision-group degree and betweenness time series, side by side."""
    path = in_paths[0]
    rows = read_csv(path, GROUPED_COLUMNS)
    groups: dict[str, list[dict]] = {}
    for r in rows:
        groups.setdefault(r["group_vision"], []).append(r)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    for g in sorted(groups, key=float, reverse=True):
        rs = sorted(groups[g], key=lambda r: as_float(r, "t", path))
        t = [as_float(r, "t", path) for r in rs]
        ax1.plot(t, [as_float(r, "mean_degree", path) for r in rs],
                 label=f"vision {float(g):g}")
        ax2.plot(t, [as_float(r, "mean_betweenness", path) for r in rs],
                 label=f"vision {float(g):g}")
    ax1.set_xlabel("time step")
    ax1.set_ylabel("mean degree")
    ax1.legend(fontsize=8)
    ax2.set_xlabel("time step")
    ax2.set_ylabel("mean betweenness")
    ax2.legend(fontsize=8)
    fig.suptitle(title or "Centrality by vision group")
    fig.tight_layout()
    _save(fig, out_path)


def snapshots(in_paths: list[str], out_path: str, title: str = "",
              times: list[int] | None = None, episode: int = 0) -> None:
    """Agent/landmark/link boards for one episode at chosen time steps."""
    records = read_trace(in_paths[0])
    times = times or [0, 5, 10, 15, 20]
    chosen = {}
    for rec in records:
        if rec["episode"] == episode and rec["t"] in times:
            chosen[rec["t"]] = rec
    missing = [t for t in times if t not in chosen]
    if missing:
        raise SchemaError(
            f"{in_paths[0]}: episode {episode} lacks steps {missing}"
        )
    fig, axes = plt.subplots(1, len(times), figsize=(3.0 * len(times), 3.2))
    axes = np.atleast_1d(axes)
    for ax, t in zip(axes, times):
        rec = chosen[t]
        agents = np.array(rec["agent_pos"], dtype=float)
        landmarks = np.array(rec["landmark_pos"], dtype=float)
        bits = rec["topology_bits"]
        n = len(agents)
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                if bits[k] == "1":
                    ax.plot([agents[i, 0], agents[j, 0]],
                            [agents[i, 1], agents[j, 1]],
                            color="tab:gray", lw=1.0, zorder=1)
                k += 1
        ax.scatter(landmarks[:, 0], landmarks[:, 1], marker="x", s=60,
                   color="tab:red", zorder=2, label="landmarks")
        ax.scatter(agents[:, 0], agents[:, 1], s=45, color="tab:blue",
                   zorder=3, label="agents")
        ax.set_title(f"t = {t}")
        ax.set_xlim(-1.6, 1.6)
        ax.set_ylim(-1.6, 1.6)
        ax.set_aspect("equal")
        ax.tick_params(labelsize=7)
    axes[0].legend(fontsize=7, loc="lower left")
    fig.suptitle(title or f"Episode {episode} over time")
    fig.tight_layout()
    _save(fig, out_path)
