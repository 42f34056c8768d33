"""Statistics over recorded traces: density phases, grouped centrality, summaries.

Everything here is a pure function of trace records, so re-running analysis
on the same files reproduces identical outputs byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .env import EpisodeTrace
from .graphs import (
    DensityCategory,
    betweenness,
    degrees,
    density_category,
    pair_count,
    topology_from_bits,
)

CATEGORY_COLUMNS = {
    DensityCategory.SPARSE: "frac_sparse",
    DensityCategory.MID_DENSE: "frac_mid",
    DensityCategory.DENSE: "frac_dense",
    DensityCategory.VERY_DENSE: "frac_very",
}


def _infer_n(traces: list[EpisodeTrace]) -> int:
    sizes = {len(r["topology_bits"]) for t in traces for r in t.records}
    if len(sizes) != 1:
        raise ValueError(f"traces mix different topology sizes: {sorted(sizes)}")
    L = sizes.pop()
    n = round((1 + math.sqrt(1 + 8 * L)) / 2)
    if pair_count(n) != L:
        raise ValueError(f"{L} bits is not a valid pair count")
    return n


def _horizon(traces: list[EpisodeTrace]) -> int:
    horizons = {len(t.records) for t in traces}
    if len(horizons) != 1:
        raise ValueError(f"traces mix different horizons: {sorted(horizons)}")
    return horizons.pop()


def _topologies(trace: EpisodeTrace, n: int):
    return [topology_from_bits(n, (int(c) for c in r["topology_bits"]))
            for r in trace.records]


@dataclass
class DensitySeries:
    t: np.ndarray
    fractions: dict[DensityCategory, np.ndarray]

    def __post_init__(self):
        total = sum(self.fractions.values())
        if not np.allclose(total, 1.0, atol=1e-9):
            raise ValueError("density fractions must sum to 1 at every step")


def density_distribution(traces: list[EpisodeTrace]) -> DensitySeries:
    """Per step, the fraction of episodes in each link-density band."""
    if not traces:
        raise ValueError("no traces to analyze")
    n = _infer_n(traces)
    horizon = _horizon(traces)
    counts = {c: np.zeros(horizon) for c in DensityCategory}
    for trace in traces:
        for step, topo in enumerate(_topologies(trace, n)):
            counts[density_category(topo)][step] += 1
    total = len(traces)
    return DensitySeries(
        t=np.arange(horizon),
        fractions={c: counts[c] / total for c in DensityCategory},
    )


@dataclass
class GroupedCentralitySeries:
    t: np.ndarray
    groups: list[float]  # distinct vision values, descending
    mean_degree: dict[float, np.ndarray]
    mean_betweenness: dict[float, np.ndarray]


def grouped_series(
    traces: list[EpisodeTrace], vision_ranges: tuple[float, ...]
) -> GroupedCentralitySeries:
    """Mean degree/betweenness per step for agents sharing a vision range."""
    if not traces:
        raise ValueError("no traces to analyze")
    n = _infer_n(traces)
    if len(vision_ranges) != n:
        raise ValueError(
            f"grouping covers {len(vision_ranges)} agents, traces have {n}"
        )
    horizon = _horizon(traces)
    members: dict[float, list[int]] = {}
    for idx, v in enumerate(vision_ranges):
        members.setdefault(float(v), []).append(idx)
    groups = sorted(members, reverse=True)

    deg_acc = {g: np.zeros(horizon) for g in groups}
    bet_acc = {g: np.zeros(horizon) for g in groups}
    for trace in traces:
        for step, topo in enumerate(_topologies(trace, n)):
            deg = degrees(topo)
            bet = betweenness(topo)
            for g in groups:
                deg_acc[g][step] += deg[members[g]].mean()
                bet_acc[g][step] += bet[members[g]].mean()
    m = len(traces)
    return GroupedCentralitySeries(
        t=np.arange(horizon),
        groups=groups,
        mean_degree={g: deg_acc[g] / m for g in groups},
        mean_betweenness={g: bet_acc[g] / m for g in groups},
    )


@dataclass
class PhaseContrast:
    early_mean_links: float
    late_mean_links: float
    difference: float  # early minus late
    t_statistic: float
    p_value: float
    significant: bool  # Welch test at alpha = 0.05


def phase_contrast(
    traces: list[EpisodeTrace],
    early: tuple[int, int] | None = None,
    late: tuple[int, int] | None = None,
    alpha: float = 0.05,
) -> PhaseContrast:
    """Compare per-episode mean link counts between two step windows.

    Default windows are the first and last fifth of the horizon (steps
    [0, 10) and [40, 50) at horizon 50); shorter horizons scale them.
    """
    if not traces:
        raise ValueError("no traces to analyze")
    horizon = _horizon(traces)
    if early is None:
        early = (0, max(1, horizon // 5))
    if late is None:
        late = (horizon - max(1, horizon // 5), horizon)
    links = np.array(
        [[sum(int(c) for c in r["topology_bits"]) for r in t.records] for t in traces],
        dtype=float,
    )
    a = links[:, early[0]:early[1]].mean(axis=1)
    b = links[:, late[0]:late[1]].mean(axis=1)
    diff = float(a.mean() - b.mean())
    if np.allclose(a.std(), 0.0) and np.allclose(b.std(), 0.0):
        # degenerate Welch: identical constants are indistinguishable,
        # different constants are trivially distinct
        t_stat = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        p = 1.0 if diff == 0.0 else 0.0
    else:
        res = stats.ttest_ind(a, b, equal_var=False)
        t_stat, p = float(res.statistic), float(res.pvalue)
    return PhaseContrast(
        early_mean_links=float(a.mean()),
        late_mean_links=float(b.mean()),
        difference=diff,
        t_statistic=t_stat,
        p_value=p,
        significant=bool(p < alpha),
    )


@dataclass
class SummaryRow:
    method: str
    scenario: str
    mean_return: float
    stderr: float
    mean_perf: float
    mean_cost: float


def summarize(entries: list[tuple[str, str, list[EpisodeTrace]]]) -> list[SummaryRow]:
    """Per (method, scenario): mean +/- stderr of episode return, and the
    performance / resource components."""
    if not entries:
        raise ValueError("nothing to summarize")
    rows = []
    for method, scenario, traces in entries:
        if not traces:
            raise ValueError(f"no traces for {method}/{scenario}")
        returns = np.array([t.total_return for t in traces])
        stderr = (
            float(returns.std(ddof=1) / np.sqrt(len(returns)))
            if len(returns) > 1 else 0.0
        )
        rows.append(
            SummaryRow(
                method=method,
                scenario=scenario,
                mean_return=float(returns.mean()),
                stderr=stderr,
                mean_perf=float(np.mean([t.total_performance for t in traces])),
                mean_cost=float(np.mean([t.total_cost for t in traces])),
            )
        )
    return rows


def _write_lines(path: str, lines: list[str]) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_density_csv(series: DensitySeries, path: str, header_comment: str = "") -> None:
    lines = [f"# {header_comment}"] if header_comment else []
    lines.append("t,frac_sparse,frac_mid,frac_dense,frac_very")
    for i, t in enumerate(series.t):
        row = [str(int(t))] + [
            repr(float(series.fractions[c][i])) for c in DensityCategory
        ]
        lines.append(",".join(row))
    _write_lines(path, lines)


def write_grouped_csv(series: GroupedCentralitySeries, path: str,
                      header_comment: str = "") -> None:
    lines = [f"# {header_comment}"] if header_comment else []
    lines.append("t,group_vision,mean_degree,mean_betweenness")
    for g in series.groups:
        for i, t in enumerate(series.t):
            lines.append(
                f"{int(t)},{g!r},{float(series.mean_degree[g][i])!r},"
                f"{float(series.mean_betweenness[g][i])!r}"
            )
    _write_lines(path, lines)


def write_summary_csv(rows: list[SummaryRow], path: str, header_comment: str = "") -> None:
    lines = [f"# {header_comment}"] if header_comment else []
    lines.append("method,scenario,mean_return,stderr,mean_perf,mean_cost")
    for r in rows:
        lines.append(
            f"{r.method},{r.scenario},{r.mean_return!r},{r.stderr!r},"
            f"{r.mean_perf!r},{r.mean_cost!r}"
        )
    _write_lines(path, lines)
