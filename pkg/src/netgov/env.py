"""Partially observable particle-spread world with topology-mediated sharing.

Workers try to cover landmarks but only see entities within their own vision
range. Each step the manager assigns a communication topology; neighbors on
that topology pool what they saw this step. Reward is coverage performance
minus a per-link resource cost.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import Topology, unflatten

SETTLE_RADIUS = 0.05  # force ramps down inside this distance to avoid orbiting


@dataclass
class EnvConfig:
    n_agents: int = 4
    vision_ranges: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0)
    link_cost: float = 0.1
    objective_weight: float = 1.0
    horizon: int = 50
    collision_radius: float = 0.15
    collision_penalty: float = 1.0
    dt: float = 0.1
    damping: float = 0.25
    max_speed: float = 1.0
    max_force: float = 1.0
    init_halfwidth: float = 1.0  # entities start inside a 2x2 square
    position_limit: float = 1.5
    seed: int = 0

    # landmark count equals agent count: one target per worker

    def __post_init__(self):
        if isinstance(self.vision_ranges, (int, float)):
            self.vision_ranges = (float(self.vision_ranges),) * self.n_agents
        else:
            self.vision_ranges = tuple(float(v) for v in self.vision_ranges)
        if len(self.vision_ranges) != self.n_agents:
            raise ValueError(
                f"need {self.n_agents} vision ranges, got {len(self.vision_ranges)}"
            )
        if any(v < 0 for v in self.vision_ranges):
            raise ValueError("vision ranges must be >= 0")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.link_cost < 0:
            raise ValueError("link cost must be >= 0")

    @property
    def obs_dim(self) -> int:
        return 7 * self.n_agents


_CONFIG_FIELDS = [
    "n_agents", "vision_ranges", "link_cost", "objective_weight", "horizon",
    "collision_radius", "collision_penalty", "dt", "damping", "max_speed",
    "max_force", "init_halfwidth", "position_limit", "seed",
]


def config_from_dict(doc: dict) -> EnvConfig:
    unknown = set(doc) - set(_CONFIG_FIELDS)
    if unknown:
        raise ValueError(f"unknown env config keys: {sorted(unknown)}")
    return EnvConfig(**doc)


def config_to_dict(cfg: EnvConfig) -> dict:
    return {k: getattr(cfg, k) for k in _CONFIG_FIELDS}


def load_config(path: str) -> EnvConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


@dataclass
class WorldState:
    agent_pos: np.ndarray  # (n, 2)
    agent_vel: np.ndarray  # (n, 2)
    landmark_pos: np.ndarray  # (n, 2)
    t: int = 0


@dataclass
class WorkerObservation:
    """What one worker can see: itself, plus in-range entities (relative)."""

    agent_index: int
    position: np.ndarray
    velocity: np.ndarray
    landmarks: dict[int, np.ndarray]  # landmark index -> relative position
    agents: dict[int, np.ndarray]  # other agent index -> relative position


@dataclass
class Belief:
    """Own observation merged with one-hop neighbors', in absolute coordinates.

    Each entry is (position, source agent); own sightings win over shared
    ones, then lower source index.
    """

    agent_index: int
    position: np.ndarray
    velocity: np.ndarray
    landmarks: dict[int, tuple[np.ndarray, int]]
    agents: dict[int, tuple[np.ndarray, int]]


@dataclass
class StepOutcome:
    reward: float
    performance: float
    cost: float
    next_observation: np.ndarray
    terminal: bool
    record: dict = field(repr=False)


@dataclass
class EpisodeTrace:
    episode: int
    records: list[dict]
    total_return: float
    total_performance: float
    total_cost: float


def grid_landmark_positions(n: int, halfwidth: float = 1.0) -> np.ndarray:
    """First n points of a centered square grid; used for snapshot demos."""
    g = math.ceil(math.sqrt(n))
    coords = np.linspace(-0.6 * halfwidth, 0.6 * halfwidth, g) if g > 1 else [0.0]
    points = [(x, y) for y in coords for x in coords]
    return np.array(points[:n])


def reset(cfg: EnvConfig, episode_seed: int,
          grid_landmarks: bool = False) -> tuple[WorldState, np.ndarray]:
    """Fresh world: agents then landmarks i.i.d. uniform in the init square.

    With `grid_landmarks` the landmarks sit on a fixed centered grid instead
    (agents stay random), which makes episode snapshots comparable.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(episode_seed)]))
    hw = cfg.init_halfwidth
    n = cfg.n_agents
    agent_pos = rng.uniform(-hw, hw, size=(n, 2))
    if grid_landmarks:
        landmark_pos = grid_landmark_positions(n, hw)
    else:
        landmark_pos = rng.uniform(-hw, hw, size=(n, 2))
    state = WorldState(
        agent_pos=agent_pos,
        agent_vel=np.zeros((n, 2)),
        landmark_pos=landmark_pos,
        t=0,
    )
    return state, manager_observation(state, cfg)


def observe_worker(state: WorldState, agent_index: int, cfg: EnvConfig) -> WorkerObservation:
    """Entities are visible iff their distance is <= this agent's vision range."""
    pos = state.agent_pos[agent_index]
    reach = cfg.vision_ranges[agent_index]
    landmarks = {}
    for j, lp in enumerate(state.landmark_pos):
        rel = lp - pos
        if np.hypot(rel[0], rel[1]) <= reach:
            landmarks[j] = rel
    agents = {}
    for j, ap in enumerate(state.agent_pos):
        if j == agent_index:
            continue
        rel = ap - pos
        if np.hypot(rel[0], rel[1]) <= reach:
            agents[j] = rel
    return WorkerObservation(
        agent_index, pos.copy(), state.agent_vel[agent_index].copy(), landmarks, agents
    )


def communicate(observations: list[WorkerObservation], topology: Topology) -> list[Belief]:
    """One hop of sharing: belief_i = own sightings + adjacent agents' sightings."""
    n = len(observations)
    if topology.n != n:
        raise ValueError(f"topology n={topology.n} != {n} observations")
    adj = unflatten(topology)
    beliefs = []
    for i, own in enumerate(observations):
        landmarks: dict[int, tuple[np.ndarray, int]] = {}
        agents: dict[int, tuple[np.ndarray, int]] = {}
        sources = [i] + [j for j in range(n) if adj[i, j]]
        for src in sources:
            obs = observations[src]
            for li, rel in obs.landmarks.items():
                landmarks.setdefault(li, (obs.position + rel, src))
            for ai, rel in obs.agents.items():
                if ai != i:
                    agents.setdefault(ai, (obs.position + rel, src))
            if src != i:
                agents.setdefault(src, (obs.position.copy(), src))
        beliefs.append(Belief(i, own.position, own.velocity, landmarks, agents))
    return beliefs


def worker_policy(belief: Belief, agent_index: int, cfg: EnvConfig) -> np.ndarray:
    """Greedy assignment over everything this worker knows.

    Repeatedly match the closest (known agent, known landmark) pair and
    remove both; the worker then heads for its own match at full throttle,
    ramping the force down inside SETTLE_RADIUS. Knowing nothing, or being
    left without a landmark, means standing still. Ties break on lower
    landmark index, then lower agent index, so the rule is deterministic.
    """
    if not belief.landmarks:
        return np.zeros(2)
    agents = [(agent_index, belief.position)]
    agents += [(ai, p) for ai, (p, _src) in sorted(belief.agents.items())]
    landmarks = [(li, p) for li, (p, _src) in sorted(belief.landmarks.items())]
    pairs = sorted(
        (float(np.hypot(*(lp - ap))), li, ai, lp)
        for ai, ap in agents
        for li, lp in landmarks
    )
    taken_agents, taken_landmarks = set(), set()
    target = None
    for d, li, ai, lp in pairs:
        if ai in taken_agents or li in taken_landmarks:
            continue
        taken_agents.add(ai)
        taken_landmarks.add(li)
        if ai == agent_index:
            target = lp
            break
    if target is None:
        return np.zeros(2)
    delta = target - belief.position
    dist = float(np.hypot(*delta))
    if dist == 0.0:
        return np.zeros(2)
    scale = cfg.max_force * min(1.0, dist / SETTLE_RADIUS)
    return delta / dist * scale


def manager_observation(state: WorldState, cfg: EnvConfig) -> np.ndarray:
    """7 values per agent: pos, vel, saw-a-landmark flag, offset to nearest seen.

    Built from each worker's own (pre-sharing) observation; landmarks nobody
    saw stay invisible to the manager too.
    """
    parts = []
    for i in range(cfg.n_agents):
        obs = observe_worker(state, i, cfg)
        if obs.landmarks:
            li = min(obs.landmarks, key=lambda j: (np.hypot(*obs.landmarks[j]), j))
            flag, nearest = 1.0, obs.landmarks[li]
        else:
            flag, nearest = 0.0, np.zeros(2)
        parts.append(np.concatenate([obs.position, obs.velocity, [flag], nearest]))
    return np.concatenate(parts)


def _performance(state: WorldState, cfg: EnvConfig) -> float:
    """Zero iff every landmark is covered exactly and nothing collides."""
    diffs = state.landmark_pos[:, None, :] - state.agent_pos[None, :, :]
    dists = np.hypot(diffs[..., 0], diffs[..., 1])
    coverage = -float(dists.min(axis=1).sum())
    collisions = 0
    for i in range(cfg.n_agents):
        for j in range(i + 1, cfg.n_agents):
            sep = np.hypot(*(state.agent_pos[i] - state.agent_pos[j]))
            if sep < 2 * cfg.collision_radius:
                collisions += 1
    return coverage - cfg.collision_penalty * collisions


def step(state: WorldState, topology: Topology, cfg: EnvConfig,
         episode: int = 0) -> tuple[WorldState, StepOutcome]:
    """Observe -> share -> act -> integrate; returns the new state and outcome."""
    if state.t >= cfg.horizon:
        raise RuntimeError(f"episode is over (t={state.t}, horizon={cfg.horizon})")
    if topology.n != cfg.n_agents:
        raise ValueError(f"topology n={topology.n} != n_agents={cfg.n_agents}")
    observations = [observe_worker(state, i, cfg) for i in range(cfg.n_agents)]
    beliefs = communicate(observations, topology)
    forces = np.array(
        [worker_policy(beliefs[i], i, cfg) for i in range(cfg.n_agents)]
    )

    vel = (1.0 - cfg.damping) * state.agent_vel + forces * cfg.dt
    speed = np.hypot(vel[:, 0], vel[:, 1])
    over = speed > cfg.max_speed
    if over.any():
        vel[over] *= (cfg.max_speed / speed[over])[:, None]
    pos = np.clip(state.agent_pos + vel * cfg.dt,
                  -cfg.position_limit, cfg.position_limit)

    new_state = WorldState(pos, vel, state.landmark_pos, state.t + 1)
    performance = _performance(new_state, cfg)
    cost = cfg.link_cost * topology.link_count
    reward = performance - cfg.objective_weight * cost
    record = {
        "episode": episode,
        "t": state.t,
        "agent_pos": [[float(x), float(y)] for x, y in state.agent_pos],
        "landmark_pos": [[float(x), float(y)] for x, y in state.landmark_pos],
        "topology_bits": topology.bit_string(),
        "reward": reward,
        "performance": performance,
        "cost": cost,
    }
    outcome = StepOutcome(
        reward=reward,
        performance=performance,
        cost=cost,
        next_observation=manager_observation(new_state, cfg),
        terminal=new_state.t >= cfg.horizon,
        record=record,
    )
    return new_state, outcome


def run_episode(cfg: EnvConfig, policy, episode_seed: int,
                episode: int = 0, grid_landmarks: bool = False) -> EpisodeTrace:
    """Roll one full episode; `policy` maps a manager observation to a Topology."""
    state, obs = reset(cfg, episode_seed, grid_landmarks=grid_landmarks)
    records = []
    ret = perf = cost = 0.0
    while True:
        topo = policy(obs)
        state, out = step(state, topo, cfg, episode=episode)
        records.append(out.record)
        ret += out.reward
        perf += out.performance
        cost += out.cost
        obs = out.next_observation
        if out.terminal:
            break
    return EpisodeTrace(episode, records, ret, perf, cost)


def write_trace_jsonl(traces: list[EpisodeTrace], path: str,
                      config_hash: str = "") -> None:
    """One JSON record per step; config hash rides along in every record."""
    with open(path, "w") as fh:
        for trace in traces:
            for rec in trace.records:
                if config_hash:
                    rec = {**rec, "config_hash": config_hash}
                fh.write(json.dumps(rec) + "\n")


def read_trace_jsonl(path: str) -> list[EpisodeTrace]:
    by_episode: dict[int, list[dict]] = {}
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            by_episode.setdefault(rec["episode"], []).append(rec)
    traces = []
    for ep in sorted(by_episode):
        records = sorted(by_episode[ep], key=lambda r: r["t"])
        traces.append(
            EpisodeTrace(
                ep,
                records,
                sum(r["reward"] for r in records),
                sum(r["performance"] for r in records),
                sum(r["cost"] for r in records),
            )
        )
    return traces
