"""Topology-choosing managers: latent-action DDPG and Q-learning baselines.

The DDPG manager acts in the autoencoder's latent space and lets the frozen
decoder turn latent vectors into topologies. Baselines act on link bits
directly: a per-link branching dueling Q-network, a flat Q-network over the
enumerated topology set (small n only), and a coin-flip policy.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import env as environment
from . import nets, vae
from .env import EnvConfig, EpisodeTrace, run_episode
from .graphs import (
    Topology,
    pair_count,
    topology_from_bits,
    topology_from_index,
    topology_index,
)
from .nets import DenseNet, DivergenceError

FLAT_LIMIT = 20  # max link count for the enumerated-action Q-network

# Episode seeds: high bits carry the base seed, low bits the episode index,
# with bit 23 separating the training and evaluation namespaces.
_EVAL_OFFSET = 1 << 23


def train_episode_seed(base: int, index: int) -> int:
    return (int(base) << 24) + index


def eval_episode_seed(base: int, index: int) -> int:
    return (int(base) << 24) + _EVAL_OFFSET + index


@dataclass
class ManagerConfig:
    """Training hyperparameters; hidden sizes default to the full-scale runs."""

    kind: str = "vae_rl"  # vae_rl | bdqn | flat_dqn | random
    episodes: int = 2000
    gamma: float = 0.99
    replay_capacity: int = 100_000
    batch_size: int = 128
    warmup: int = 1000
    tau: float = 0.005
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    target_sync: int = 500
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    sigma_start: float = 0.3
    sigma_end: float = 0.01
    uniform_eps_start: float = 0.15
    uniform_eps_end: float = 0.02
    explore_fraction: float = 0.8
    latent_clip: float = 3.0
    actor_hidden: tuple[int, ...] = (1024, 512)
    critic_hidden: tuple[int, ...] = (1024, 512, 256)
    trunk_hidden: tuple[int, ...] = (1024, 512)
    updates_per_step: int = 1
    threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("vae_rl", "bdqn", "flat_dqn", "random"):
            raise ValueError(f"unknown manager kind {self.kind!r}")
        self.actor_hidden = tuple(self.actor_hidden)
        self.critic_hidden = tuple(self.critic_hidden)
        self.trunk_hidden = tuple(self.trunk_hidden)


class LinearDecay:
    """start -> end linearly over `steps`, then flat; non-increasing."""

    def __init__(self, start: float, end: float, steps: int):
        self.start, self.end, self.steps = start, end, max(int(steps), 1)

    def at(self, step: int) -> float:
        frac = min(max(step, 0) / self.steps, 1.0)
        return self.start + (self.end - self.start) * frac


class ReplayBuffer:
    """Ring buffer over fixed-width transitions with seeded batch sampling."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int, seed: int = 0):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.act = np.zeros((capacity, act_dim))
        self.reward = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)
        self.size = 0
        self.cursor = 0
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, capacity]))

    def add(self, obs, act, reward, next_obs, done):
        i = self.cursor
        self.obs[i] = obs
        self.act[i] = act
        self.reward[i] = reward
        self.next_obs[i] = next_obs
        self.done[i] = float(done)
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int):
        idx = self.rng.choice(self.size, size=min(batch_size, self.size), replace=False)
        return (self.obs[idx], self.act[idx], self.reward[idx],
                self.next_obs[idx], self.done[idx])


def soft_update(target: DenseNet, live: DenseNet, tau: float) -> None:
    for tl, ll in zip(target.layers, live.layers):
        tl.weight[...] = (tau * ll.weight.astype(np.float64)
                          + (1 - tau) * tl.weight.astype(np.float64)).astype(np.float32)
        tl.bias[...] = (tau * ll.bias.astype(np.float64)
                        + (1 - tau) * tl.bias.astype(np.float64)).astype(np.float32)


def hard_update(target: DenseNet, live: DenseNet) -> None:
    for tl, ll in zip(target.layers, live.layers):
        tl.weight[...] = ll.weight
        tl.bias[...] = ll.bias


class DdpgManager:
    """Deterministic actor over the latent space with a frozen decoder.

    The actor's tanh head is scaled to [-latent_clip, latent_clip].
    Exploration adds decaying Gaussian noise and, with a small decaying
    probability, resamples the whole latent vector uniformly: the decoded
    topology is piecewise constant in z, so purely local noise never
    shows the critic what distant decode regions (the sparse pocket in
    particular) are worth.
    """

    kind = "vae_rl"

    def __init__(self, obs_dim: int, decoder: vae.VaeModel, cfg: ManagerConfig):
        self.obs_dim = obs_dim
        self.decoder = decoder
        self.cfg = cfg
        self.latent_dim = decoder.latent_dim
        d = self.latent_dim
        seed = cfg.seed
        self.actor = nets.dense_net(
            [obs_dim, *cfg.actor_hidden, d],
            ["relu"] * len(cfg.actor_hidden) + ["tanh"], seed=seed)
        self.critic = nets.dense_net(
            [obs_dim + d, *cfg.critic_hidden, 1],
            ["relu"] * len(cfg.critic_hidden) + ["identity"], seed=seed + 1)
        self.actor_target = nets.clone(self.actor)
        self.critic_target = nets.clone(self.critic)
        self.actor_state = nets.adam_init(self.actor, lr=cfg.actor_lr)
        self.critic_state = nets.adam_init(self.critic, lr=cfg.critic_lr)
        self.env_steps = 0
        self.sigma = LinearDecay(cfg.sigma_start, cfg.sigma_end, 0)
        self.uniform_eps = LinearDecay(cfg.uniform_eps_start, cfg.uniform_eps_end, 0)

    def set_horizon(self, total_env_steps: int) -> None:
        steps = self.cfg.explore_fraction * total_env_steps
        self.sigma = LinearDecay(self.cfg.sigma_start, self.cfg.sigma_end, steps)
        self.uniform_eps = LinearDecay(
            self.cfg.uniform_eps_start, self.cfg.uniform_eps_end, steps)

    def exploration_value(self) -> float:
        return self.sigma.at(self.env_steps)

    def latent_action(self, obs: np.ndarray) -> np.ndarray:
        return self.cfg.latent_clip * nets.forward(self.actor, obs)

    def act(self, obs, explore: bool, rng) -> tuple[np.ndarray, Topology]:
        """(latent action, decoded topology); noise only when exploring."""
        c = self.cfg.latent_clip
        z = self.latent_action(obs)
        if explore:
            if rng.random() < self.uniform_eps.at(self.env_steps):
                z = rng.uniform(-c, c, self.latent_dim)
            else:
                sigma = self.sigma.at(self.env_steps)
                if sigma > 0.0:
                    z = z + sigma * rng.standard_normal(self.latent_dim)
        z = np.clip(z, -c, c)
        probs = vae.decode(self.decoder, z)
        return z, vae.binarize(probs, self.cfg.threshold)

    def update(self, batch) -> tuple[float, float]:
        """One critic regression step and one actor ascent step; soft targets."""
        obs, act, reward, next_obs, done = batch
        B = len(obs)
        cfg = self.cfg

        a2 = cfg.latent_clip * nets.forward(self.actor_target, next_obs)
        q2 = nets.forward(self.critic_target, np.concatenate([next_obs, a2], axis=1))
        y = reward + cfg.gamma * (1.0 - done) * q2[:, 0]

        x = np.concatenate([obs, act], axis=1)
        q = nets.forward(self.critic, x)[:, 0]
        critic_loss = float(np.mean((q - y) ** 2))
        if not np.isfinite(critic_loss):
            raise DivergenceError("critic loss diverged")
        d_q = (2.0 * (q - y) / B)[:, None]
        critic_grads = nets.backprop_upstream(self.critic, x, d_q)
        nets.adam_step(self.critic, critic_grads, self.critic_state)

        # actor ascends Q(o, mu(o)) through the critic's input gradient
        a_raw = nets.forward(self.actor, obs)
        a = cfg.latent_clip * a_raw
        xa = np.concatenate([obs, a], axis=1)
        q_a = nets.forward(self.critic, xa)[:, 0]
        actor_objective = float(np.mean(q_a))
        probe = nets.backprop_upstream(self.critic, xa, np.full((B, 1), 1.0 / B))
        dq_da = probe.wrt_input[:, self.obs_dim:]
        actor_grads = nets.backprop_upstream(
            self.actor, obs, -cfg.latent_clip * dq_da)
        nets.adam_step(self.actor, actor_grads, self.actor_state)

        soft_update(self.actor_target, self.actor, cfg.tau)
        soft_update(self.critic_target, self.critic, cfg.tau)
        return critic_loss, actor_objective


class BdqnManager:
    """One dueling Q-branch per link over a shared trunk and state value."""

    kind = "bdqn"

    def __init__(self, obs_dim: int, n_agents: int, cfg: ManagerConfig):
        self.obs_dim = obs_dim
        self.n_agents = n_agents
        self.links = pair_count(n_agents)
        self.cfg = cfg
        feat = cfg.trunk_hidden[-1]
        self.trunk = nets.dense_net(
            [obs_dim, *cfg.trunk_hidden], ["relu"] * len(cfg.trunk_hidden),
            seed=cfg.seed)
        self.value = nets.dense_net([feat, 1], ["identity"], seed=cfg.seed + 1)
        self.branches = [
            nets.dense_net([feat, 2], ["identity"], seed=cfg.seed + 2 + k)
            for k in range(self.links)
        ]
        self.trunk_target = nets.clone(self.trunk)
        self.value_target = nets.clone(self.value)
        self.branch_targets = [nets.clone(b) for b in self.branches]
        self.trunk_state = nets.adam_init(self.trunk, lr=cfg.critic_lr)
        self.value_state = nets.adam_init(self.value, lr=cfg.critic_lr)
        self.branch_states = [nets.adam_init(b, lr=cfg.critic_lr) for b in self.branches]
        self.env_steps = 0
        self.updates = 0
        self.epsilon = LinearDecay(cfg.epsilon_start, cfg.epsilon_end, 0)

    def set_horizon(self, total_env_steps: int) -> None:
        self.epsilon = LinearDecay(
            self.cfg.epsilon_start, self.cfg.epsilon_end,
            self.cfg.explore_fraction * total_env_steps)

    def exploration_value(self) -> float:
        return self.epsilon.at(self.env_steps)

    def _q_all(self, obs: np.ndarray, target: bool = False) -> np.ndarray:
        """(B, links, 2) dueling Q-values: V + A - mean(A)."""
        obs = np.atleast_2d(obs)
        trunk = self.trunk_target if target else self.trunk
        value = self.value_target if target else self.value
        branches = self.branch_targets if target else self.branches
        feat = nets.forward(trunk, obs)
        v = nets.forward(value, feat)[:, 0]
        q = np.empty((len(obs), self.links, 2))
        for k, branch in enumerate(branches):
            adv = nets.forward(branch, feat)
            q[:, k, :] = v[:, None] + adv - adv.mean(axis=1, keepdims=True)
        return q

    def act(self, obs, epsilon: float, rng) -> Topology:
        """Per-link epsilon-greedy over the branch Q-values."""
        q = self._q_all(obs)[0]
        bits = np.argmax(q, axis=1)
        if epsilon > 0.0:
            flip = rng.random(self.links) < epsilon
            bits = np.where(flip, rng.integers(0, 2, self.links), bits)
        return topology_from_bits(self.n_agents, bits)

    def update(self, batch) -> float:
        """Mean squared per-branch TD error against the branch-mean target."""
        obs, act, reward, next_obs, done = batch
        B, L = len(obs), self.links
        cfg = self.cfg
        bits = act.astype(int)

        q_next = self._q_all(next_obs, target=True)
        y = reward + cfg.gamma * (1.0 - done) * q_next.max(axis=2).mean(axis=1)

        feat = nets.forward(self.trunk, obs)
        v = nets.forward(self.value, feat)[:, 0]
        advs = [nets.forward(b, feat) for b in self.branches]
        chosen_q = np.empty((B, L))
        for k in range(L):
            a = advs[k]
            chosen_q[:, k] = v + a[np.arange(B), bits[:, k]] - a.mean(axis=1)
        td = chosen_q - y[:, None]
        loss = float(np.mean(td**2))
        if not np.isfinite(loss):
            raise DivergenceError("branch Q loss diverged")

        d_q = 2.0 * td / (B * L)  # (B, L)
        d_feat = np.zeros_like(feat)
        value_grads = nets.backprop_upstream(self.value, feat, d_q.sum(axis=1)[:, None])
        d_feat += value_grads.wrt_input
        branch_grads = []
        for k in range(L):
            up = np.full((B, 2), -0.5) * d_q[:, k][:, None]
            up[np.arange(B), bits[:, k]] += d_q[:, k]
            g = nets.backprop_upstream(self.branches[k], feat, up)
            branch_grads.append(g)
            d_feat += g.wrt_input
        trunk_grads = nets.backprop_upstream(self.trunk, obs, d_feat)

        nets.adam_step(self.value, value_grads, self.value_state)
        for k in range(L):
            nets.adam_step(self.branches[k], branch_grads[k], self.branch_states[k])
        nets.adam_step(self.trunk, trunk_grads, self.trunk_state)

        self.updates += 1
        if self.updates % cfg.target_sync == 0:
            hard_update(self.trunk_target, self.trunk)
            hard_update(self.value_target, self.value)
            for bt, b in zip(self.branch_targets, self.branches):
                hard_update(bt, b)
        return loss


class FlatDqnManager:
    """Plain DQN over the fully enumerated topology set; small n only."""

    kind = "flat_dqn"

    def __init__(self, obs_dim: int, n_agents: int, cfg: ManagerConfig):
        links = pair_count(n_agents)
        if links > FLAT_LIMIT:
            raise ValueError(
                f"flat Q-network over 2^{links} topologies is intractable for "
                f"n={n_agents}; the enumerated action space is capped at "
                f"2^{FLAT_LIMIT} (use bdqn or vae_rl)"
            )
        self.obs_dim = obs_dim
        self.n_agents = n_agents
        self.n_actions = 2**links
        self.cfg = cfg
        self.qnet = nets.dense_net(
            [obs_dim, *cfg.trunk_hidden, self.n_actions],
            ["relu"] * len(cfg.trunk_hidden) + ["identity"], seed=cfg.seed)
        self.qnet_target = nets.clone(self.qnet)
        self.qnet_state = nets.adam_init(self.qnet, lr=cfg.critic_lr)
        self.env_steps = 0
        self.updates = 0
        self.epsilon = LinearDecay(cfg.epsilon_start, cfg.epsilon_end, 0)

    def set_horizon(self, total_env_steps: int) -> None:
        self.epsilon = LinearDecay(
            self.cfg.epsilon_start, self.cfg.epsilon_end,
            self.cfg.explore_fraction * total_env_steps)

    def exploration_value(self) -> float:
        return self.epsilon.at(self.env_steps)

    def act(self, obs, epsilon: float, rng) -> Topology:
        if epsilon > 0.0 and rng.random() < epsilon:
            index = int(rng.integers(self.n_actions))
        else:
            index = int(np.argmax(nets.forward(self.qnet, obs)))
        return topology_from_index(self.n_agents, index)

    def update(self, batch) -> float:
        obs, act, reward, next_obs, done = batch
        B = len(obs)
        cfg = self.cfg
        idx = act[:, 0].astype(int)
        q_next = nets.forward(self.qnet_target, next_obs).max(axis=1)
        y = reward + cfg.gamma * (1.0 - done) * q_next
        q_all = nets.forward(self.qnet, obs)
        td = q_all[np.arange(B), idx] - y
        loss = float(np.mean(td**2))
        if not np.isfinite(loss):
            raise DivergenceError("flat Q loss diverged")
        upstream = np.zeros_like(q_all)
        upstream[np.arange(B), idx] = 2.0 * td / B
        grads = nets.backprop_upstream(self.qnet, obs, upstream)
        nets.adam_step(self.qnet, grads, self.qnet_state)
        self.updates += 1
        if self.updates % cfg.target_sync == 0:
            hard_update(self.qnet_target, self.qnet)
        return loss


class RandomManager:
    """Every link is an independent fair coin flip."""

    kind = "random"

    def __init__(self, n_agents: int):
        self.n_agents = n_agents

    def act(self, rng) -> Topology:
        return random_topology(self.n_agents, rng)


def random_topology(n: int, rng) -> Topology:
    return topology_from_bits(n, rng.integers(0, 2, pair_count(n)))


def build_manager(env_cfg: EnvConfig, cfg: ManagerConfig,
                  vae_model: vae.VaeModel | None = None):
    obs_dim = env_cfg.obs_dim
    if cfg.kind == "vae_rl":
        if vae_model is None:
            raise ValueError(
                f"vae_rl manager needs a trained autoencoder for n={env_cfg.n_agents}; "
                "none was provided"
            )
        if vae_model.n != env_cfg.n_agents:
            raise ValueError(
                f"autoencoder was trained for n={vae_model.n} (d={vae_model.latent_dim}) "
                f"but the environment has n={env_cfg.n_agents}"
            )
        return DdpgManager(obs_dim, vae_model, cfg)
    if cfg.kind == "bdqn":
        return BdqnManager(obs_dim, env_cfg.n_agents, cfg)
    if cfg.kind == "flat_dqn":
        return FlatDqnManager(obs_dim, env_cfg.n_agents, cfg)
    return RandomManager(env_cfg.n_agents)


def _greedy_policy(manager):
    """Wrap a manager as a no-exploration obs -> Topology policy."""
    if manager.kind == "random":
        raise TypeError("random manager policies need an rng; use _random_policy")
    if manager.kind == "vae_rl":
        return lambda obs: manager.act(obs, explore=False, rng=None)[1]
    return lambda obs: manager.act(obs, epsilon=0.0, rng=None)


@dataclass
class CurvePoint:
    episode: int
    episode_return: float
    performance_sum: float
    cost_sum: float
    exploration: float


@dataclass
class TrainResult:
    manager: object
    curve: list[CurvePoint]


def train_manager(env_cfg: EnvConfig, cfg: ManagerConfig,
                  vae_model: vae.VaeModel | None = None,
                  checkpoint_dir: str | None = None,
                  checkpoint_interval: int = 0) -> TrainResult:
    """Episode loop: act with exploration, store transitions, update after warmup.

    Fully seeded: episode seeds, exploration noise, and replay sampling all
    derive from cfg.seed. The decoder of a vae_rl manager is never touched
    (checked with a parameter checksum).
    """
    manager = build_manager(env_cfg, cfg, vae_model)
    if manager.kind == "random":
        return TrainResult(manager, [])

    total_steps = cfg.episodes * env_cfg.horizon
    manager.set_horizon(total_steps)
    act_dim = {"vae_rl": getattr(manager, "latent_dim", 0),
               "bdqn": pair_count(env_cfg.n_agents),
               "flat_dqn": 1}[manager.kind]
    buffer = ReplayBuffer(cfg.replay_capacity, env_cfg.obs_dim, act_dim,
                          seed=cfg.seed)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 7]))
    decoder_checksum = (
        nets.param_checksum(manager.decoder.decoder) if manager.kind == "vae_rl" else None
    )

    curve: list[CurvePoint] = []
    for episode in range(cfg.episodes):
        state, obs = environment.reset(env_cfg, train_episode_seed(cfg.seed, episode))
        ep_return = ep_perf = ep_cost = 0.0
        exploration = manager.exploration_value()
        while True:
            if manager.kind == "vae_rl":
                if buffer.size < cfg.warmup:
                    # seed the replay with the whole latent box before any
                    # update; the actor's neighborhood alone is too narrow
                    c = cfg.latent_clip
                    action = rng.uniform(-c, c, manager.latent_dim)
                    topo = vae.binarize(vae.decode(manager.decoder, action),
                                        cfg.threshold)
                else:
                    action, topo = manager.act(obs, explore=True, rng=rng)
            else:
                epsilon = manager.exploration_value()
                topo = manager.act(obs, epsilon=epsilon, rng=rng)
                action = (np.array(topo.bits, dtype=float) if manager.kind == "bdqn"
                          else np.array([float(topology_index(topo))]))
            state, out = environment.step(state, topo, env_cfg, episode=episode)
            buffer.add(obs, action, out.reward, out.next_observation, out.terminal)
            obs = out.next_observation
            manager.env_steps += 1
            ep_return += out.reward
            ep_perf += out.performance
            ep_cost += out.cost
            if buffer.size >= cfg.warmup:
                for _ in range(cfg.updates_per_step):
                    manager.update(buffer.sample(cfg.batch_size))
            if out.terminal:
                break
        curve.append(CurvePoint(episode, ep_return, ep_perf, ep_cost, exploration))
        if (checkpoint_dir and checkpoint_interval
                and (episode + 1) % checkpoint_interval == 0):
            save_manager(manager, os.path.join(checkpoint_dir, f"ep{episode + 1:06d}"))

    if decoder_checksum is not None:
        if nets.param_checksum(manager.decoder.decoder) != decoder_checksum:
            raise RuntimeError("decoder parameters changed during manager training")
    return TrainResult(manager, curve)


@dataclass
class EvalSummary:
    episodes: int
    mean_return: float
    stderr_return: float
    mean_performance: float
    mean_cost: float
    traces: list[EpisodeTrace] = field(repr=False)


def evaluate(env_cfg: EnvConfig, manager, episodes: int, seed: int) -> EvalSummary:
    """Greedy rollouts on the evaluation seed namespace; traces retained."""
    traces = []
    for i in range(episodes):
        ep_seed = eval_episode_seed(seed, i)
        if manager.kind == "random":
            ep_rng = np.random.default_rng(np.random.SeedSequence([seed, 11, i]))
            policy = lambda obs: manager.act(ep_rng)
        else:
            policy = _greedy_policy(manager)
        traces.append(run_episode(env_cfg, policy, ep_seed, episode=i))
    returns = np.array([t.total_return for t in traces])
    stderr = float(returns.std(ddof=1) / np.sqrt(len(returns))) if len(returns) > 1 else 0.0
    return EvalSummary(
        episodes=episodes,
        mean_return=float(returns.mean()),
        stderr_return=stderr,
        mean_performance=float(np.mean([t.total_performance for t in traces])),
        mean_cost=float(np.mean([t.total_cost for t in traces])),
        traces=traces,
    )


def write_curve_csv(curve: list[CurvePoint], path: str, header_comment: str = "") -> None:
    lines = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append("episode,return,performance_sum,cost_sum,epsilon_or_sigma")
    for pt in curve:
        lines.append(
            f"{pt.episode},{pt.episode_return!r},{pt.performance_sum!r},"
            f"{pt.cost_sum!r},{pt.exploration!r}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def save_manager(manager, directory: str, vae_dir: str | None = None) -> None:
    """nn-core checkpoints plus a manifest binding kind, n, d, and the VAE hash."""
    os.makedirs(directory, exist_ok=True)
    manifest = {
        "kind": manager.kind,
        "n_agents": manager.n_agents if hasattr(manager, "n_agents") else manager.decoder.n,
        "obs_dim": getattr(manager, "obs_dim", None),
        "latent_dim": getattr(manager, "latent_dim", None),
        "vae_hash": vae.vae_checkpoint_hash(vae_dir) if vae_dir else None,
    }
    if manager.kind == "vae_rl":
        nets.save_checkpoint(manager.actor, os.path.join(directory, "actor.ckpt"))
        nets.save_checkpoint(manager.critic, os.path.join(directory, "critic.ckpt"))
    elif manager.kind == "bdqn":
        nets.save_checkpoint(manager.trunk, os.path.join(directory, "trunk.ckpt"))
        nets.save_checkpoint(manager.value, os.path.join(directory, "value.ckpt"))
        for k, b in enumerate(manager.branches):
            nets.save_checkpoint(b, os.path.join(directory, f"branch{k:03d}.ckpt"))
    elif manager.kind == "flat_dqn":
        nets.save_checkpoint(manager.qnet, os.path.join(directory, "qnet.ckpt"))
    with open(os.path.join(directory, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def load_manager(directory: str, cfg: ManagerConfig,
                 vae_model: vae.VaeModel | None = None,
                 vae_dir: str | None = None):
    with open(os.path.join(directory, "manifest.json")) as fh:
        manifest = json.load(fh)
    kind = manifest["kind"]
    if kind != cfg.kind:
        raise ValueError(f"checkpoint is for kind={kind!r}, config says {cfg.kind!r}")
    if kind == "random":
        return RandomManager(manifest["n_agents"])
    if kind == "vae_rl":
        if vae_model is None:
            raise ValueError(
                f"loading a vae_rl manager needs the autoencoder for "
                f"n={manifest['n_agents']}, d={manifest['latent_dim']}"
            )
        if manifest.get("vae_hash") and vae_dir:
            actual = vae.vae_checkpoint_hash(vae_dir)
            if actual != manifest["vae_hash"]:
                raise ValueError(
                    "autoencoder checkpoint hash does not match the one this "
                    f"manager was trained against ({actual[:12]} != "
                    f"{manifest['vae_hash'][:12]})"
                )
        manager = DdpgManager(manifest["obs_dim"], vae_model, cfg)
        manager.actor = nets.load_checkpoint(os.path.join(directory, "actor.ckpt"))
        manager.critic = nets.load_checkpoint(os.path.join(directory, "critic.ckpt"))
        manager.actor_target = nets.clone(manager.actor)
        manager.critic_target = nets.clone(manager.critic)
        manager.actor_state = nets.adam_init(manager.actor, lr=cfg.actor_lr)
        manager.critic_state = nets.adam_init(manager.critic, lr=cfg.critic_lr)
        return manager
    if kind == "bdqn":
        manager = BdqnManager(manifest["obs_dim"], manifest["n_agents"], cfg)
        manager.trunk = nets.load_checkpoint(os.path.join(directory, "trunk.ckpt"))
        manager.value = nets.load_checkpoint(os.path.join(directory, "value.ckpt"))
        manager.branches = [
            nets.load_checkpoint(os.path.join(directory, f"branch{k:03d}.ckpt"))
            for k in range(manager.links)
        ]
        manager.trunk_target = nets.clone(manager.trunk)
        manager.value_target = nets.clone(manager.value)
        manager.branch_targets = [nets.clone(b) for b in manager.branches]
        return manager
    manager = FlatDqnManager(manifest["obs_dim"], manifest["n_agents"], cfg)
    manager.qnet = nets.load_checkpoint(os.path.join(directory, "qnet.ckpt"))
    manager.qnet_target = nets.clone(manager.qnet)
    return manager
