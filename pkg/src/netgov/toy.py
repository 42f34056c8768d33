"""Three agents, four task difficulties: the analytic help-network example.

Agents hold abilities (2, 1, 0.5) and can lend half their ability across a
link. For each task requirement the best network maximizes successes minus
link costs, found by brute force over all eight 3-node topologies. Averaged
over the four requirements, the degree/betweenness ranking of the agents
does not follow the ability ranking: the middle agent drops to last.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .graphs import Topology, betweenness, degrees, enumerate_all, pair_indices


@dataclass(frozen=True)
class ToyConfig:
    abilities: tuple[float, ...] = (2.0, 1.0, 0.5)
    boost: float = 0.5
    task_reward: float = 1.0
    link_cost: float = 0.1
    requirements: tuple[float, ...] = (0.5, 1.0, 1.5, 2.0)

    def __post_init__(self):
        if list(self.abilities) != sorted(self.abilities, reverse=True):
            raise ValueError("abilities must be strictly decreasing")
        if len(set(self.abilities)) != len(self.abilities):
            raise ValueError("abilities must be strictly decreasing")
        if self.link_cost >= self.task_reward:
            raise ValueError("a link must cost less than one task success")


def boosted_abilities(cfg: ToyConfig, t: Topology) -> np.ndarray:
    """Own ability plus `boost` times each connected agent's ability."""
    if t.n != len(cfg.abilities):
        raise ValueError(f"topology n={t.n} != {len(cfg.abilities)} agents")
    a = np.array(cfg.abilities)
    total = a.copy()
    for (i, j), bit in zip(pair_indices(t.n), t.bits):
        if bit:
            total[i] += cfg.boost * a[j]
            total[j] += cfg.boost * a[i]
    return total


def system_value(cfg: ToyConfig, t: Topology, requirement: float) -> float:
    """Reward per agent meeting the requirement, minus the link bill."""
    total = boosted_abilities(cfg, t)
    successes = int(np.sum(total >= requirement))
    return cfg.task_reward * successes - cfg.link_cost * t.link_count


def _helper_profile(cfg: ToyConfig, t: Topology) -> tuple:
    # per edge, the stronger endpoint is the helper; compare descending
    helpers = sorted(
        (
            max(cfg.abilities[i], cfg.abilities[j])
            for (i, j), bit in zip(pair_indices(t.n), t.bits)
            if bit
        ),
        reverse=True,
    )
    return tuple(helpers)


def optimal_network(cfg: ToyConfig, requirement: float) -> Topology:
    """Exhaustive argmax of system value.

    Value ties are broken toward the network whose helping edges use the
    stronger helpers (ties there fall back to the bit pattern, making the
    choice deterministic).
    """
    candidates = enumerate_all(len(cfg.abilities)).topologies
    return max(
        candidates,
        key=lambda t: (
            system_value(cfg, t, requirement),
            _helper_profile(cfg, t),
            tuple(-b for b in t.bits),
        ),
    )


@dataclass
class ScenarioResult:
    requirement: float
    topology: Topology
    boosted: np.ndarray
    value: float


@dataclass
class RankReport:
    config: ToyConfig
    scenarios: list[ScenarioResult]
    avg_degrees: np.ndarray
    avg_betweenness: np.ndarray
    degree_rank: list[float] = field(default_factory=list)  # abilities, best first
    betweenness_rank: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "abilities": list(self.config.abilities),
            "scenarios": [
                {
                    "requirement": s.requirement,
                    "topology_bits": s.topology.bit_string(),
                    "boosted_abilities": [float(x) for x in s.boosted],
                    "value": s.value,
                }
                for s in self.scenarios
            ],
            "average_degrees": [float(x) for x in self.avg_degrees],
            "average_betweenness": [float(x) for x in self.avg_betweenness],
            "degree_rank": self.degree_rank,
            "betweenness_rank": self.betweenness_rank,
        }

    def format_text(self) -> str:
        abil = self.config.abilities
        lines = ["requirement  network  value   boosted abilities"]
        for s in self.scenarios:
            boosted = " ".join(f"{x:5.2f}" for x in s.boosted)
            lines.append(
                f"{s.requirement:>11.2f}  {s.topology.bit_string()}   {s.value:5.2f}   {boosted}"
            )
        lines.append("")
        lines.append("agent        " + "  ".join(f"{a:>7.2f}" for a in abil))
        lines.append("avg degree   " + "  ".join(f"{d:>7.4g}" for d in self.avg_degrees))
        lines.append("avg betw.    " + "  ".join(f"{b:>7.4g}" for b in self.avg_betweenness))
        lines.append(
            "degree rank      " + " > ".join(f"agent {a:g}" for a in self.degree_rank)
        )
        lines.append(
            "betweenness rank " + " > ".join(f"agent {a:g}" for a in self.betweenness_rank)
        )
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def rank_report(cfg: ToyConfig, weights: tuple[float, ...] | None = None) -> RankReport:
    """Degree/betweenness averages across the requirement scenarios.

    `weights` defaults to uniform; pass custom weights to emphasize
    mid-difficulty tasks.
    """
    if weights is None:
        weights = (1.0,) * len(cfg.requirements)
    if len(weights) != len(cfg.requirements):
        raise ValueError("one weight per requirement")
    w = np.array(weights) / np.sum(weights)
    scenarios = []
    deg = np.zeros(len(cfg.abilities))
    bet = np.zeros(len(cfg.abilities))
    for wi, req in zip(w, cfg.requirements):
        t = optimal_network(cfg, req)
        scenarios.append(
            ScenarioResult(req, t, boosted_abilities(cfg, t), system_value(cfg, t, req))
        )
        deg += wi * degrees(t)
        bet += wi * betweenness(t)
    order_deg = np.argsort(-deg, kind="stable")
    order_bet = np.argsort(-bet, kind="stable")
    return RankReport(
        config=cfg,
        scenarios=scenarios,
        avg_degrees=deg,
        avg_betweenness=bet,
        degree_rank=[cfg.abilities[i] for i in order_deg],
        betweenness_rank=[cfg.abilities[i] for i in order_bet],
    )
