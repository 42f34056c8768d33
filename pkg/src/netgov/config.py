"""Run configuration: profile defaults, strict-keyed JSON overlays, hashing.

A run config is a nested JSON document. The chosen profile supplies every
default; a user file may overlay values but never introduce unknown keys
(typos must fail loudly, not silently revert to defaults). The SHA-256 of
the merged document is stamped into every artifact for provenance.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

from .env import EnvConfig
from .managers import ManagerConfig


class ConfigError(ValueError):
    """Unusable run configuration; the message carries the offending key path."""


DESK = {
    "env": {
        "n_agents": 4,
        "vision_ranges": 1.0,
        "link_cost": 0.1,
        "objective_weight": 1.0,
        "horizon": 50,
        "collision_radius": 0.15,
        "collision_penalty": 1.0,
        "dt": 0.1,
        "damping": 0.25,
        "max_speed": 1.0,
        "max_force": 1.0,
        "init_halfwidth": 1.0,
        "position_limit": 1.5,
        "seed": 0,
    },
    "vae": {
        "latent_dim": 6,
        "enc_hidden": [512, 256],
        "dec_hidden": [256, 512],
        "epochs": 800,
        "batch_size": 16,
        "lr": 1e-3,
        "beta": 0.25,
        "threshold": 0.5,
        "val_fraction": 0.1,
        "seed": 0,
        "logvar_bias_init": -4.0,
        "dataset_scheme": "enumerate",  # enumerate | sample
        "dataset_count": 0,
        "dataset_seed": 0,
    },
    "manager": {
        "kind": "vae_rl",
        "episodes": 2000,
        "gamma": 0.99,
        "replay_capacity": 100_000,
        "batch_size": 128,
        "warmup": 1000,
        "tau": 0.005,
        "actor_lr": 1e-4,
        "critic_lr": 1e-3,
        "target_sync": 500,
        "epsilon_start": 1.0,
        "epsilon_end": 0.05,
        "sigma_start": 0.3,
        "sigma_end": 0.01,
        "explore_fraction": 0.8,
        "latent_clip": 3.0,
        "actor_hidden": [64, 64],
        "critic_hidden": [128, 64],
        "trunk_hidden": [128, 64],
        "updates_per_step": 1,
        "threshold": 0.5,
        "seed": 0,
        "checkpoint_interval": 0,
    },
    "eval": {
        "episodes": 100,
        "seed": 1000,
    },
    "trace": {
        "policy": "random",  # random | empty | complete | manager
        "episodes": 1,
        "seed": 7,
        "grid_landmarks": True,
    },
    "paths": {
        "dataset": "dataset.txt",
        "vae_dir": "vae",
        "vae_report": "vae_report.csv",
        "manager_dir": "manager",
        "curve": "curve.csv",
        "traces": "traces.jsonl",
        "metrics_dir": "metrics",
        "trace_demo": "snapshot_trace.jsonl",
    },
}

PAPER = copy.deepcopy(DESK)
PAPER["env"].update({"n_agents": 10})
PAPER["vae"].update(
    {
        "latent_dim": 10,
        "epochs": 2000,
        "batch_size": 64,
        "dataset_scheme": "sample",
        "dataset_count": 50_000,
    }
)
PAPER["manager"].update(
    {
        "episodes": 20_000,
        "actor_hidden": [1024, 512],
        "critic_hidden": [1024, 512, 256],
        "trunk_hidden": [1024, 512],
    }
)
PAPER["eval"].update({"episodes": 1000})

PROFILES = {"desk": DESK, "paper": PAPER}


def _merge(base: dict, overlay: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in overlay.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{here}: expected an object")
            out[key] = _merge(base[key], value, here)
        else:
            out[key] = value
    return out


def config_hash(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass
class RunConfig:
    doc: dict
    profile: str

    @property
    def hash(self) -> str:
        return config_hash(self.doc)

    def env_config(self) -> EnvConfig:
        return EnvConfig(**self.doc["env"])

    def manager_config(self) -> ManagerConfig:
        fields = {k: v for k, v in self.doc["manager"].items()
                  if k != "checkpoint_interval"}
        for k in ("actor_hidden", "critic_hidden", "trunk_hidden"):
            fields[k] = tuple(fields[k])
        return ManagerConfig(**fields)

    def vae_train_config(self):
        from .vae import VaeTrainConfig

        v = self.doc["vae"]
        return VaeTrainConfig(
            latent_dim=v["latent_dim"],
            enc_hidden=tuple(v["enc_hidden"]),
            dec_hidden=tuple(v["dec_hidden"]),
            epochs=v["epochs"],
            batch_size=v["batch_size"],
            lr=v["lr"],
            beta=v["beta"],
            threshold=v["threshold"],
            seed=v["seed"],
            logvar_bias_init=v["logvar_bias_init"],
        )

    def scenario_label(self) -> str:
        visions = self.env_config().vision_ranges
        if len(set(visions)) == 1:
            return f"vision_{visions[0]:g}"
        return "het_" + "_".join(f"{v:g}" for v in visions)


def load_run_config(
    path: str | None = None,
    profile: str = "desk",
    seed_override: int | None = None,
    seed_key: str | None = None,
) -> RunConfig:
    """Profile defaults overlaid with an optional user JSON document.

    `seed_key` is the dotted location (e.g. "manager.seed") rewritten when
    the caller passes a seed override.
    """
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; choose desk or paper")
    doc = copy.deepcopy(PROFILES[profile])
    if path is not None:
        try:
            with open(path) as fh:
                overlay = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})")
        if not isinstance(overlay, dict):
            raise ConfigError(f"{path}: top level must be an object")
        doc = _merge(doc, overlay)
    if seed_override is not None and seed_key is not None:
        section, _, leaf = seed_key.partition(".")
        doc[section][leaf] = int(seed_override)
    return RunConfig(doc, profile)
