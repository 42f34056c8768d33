"""Command-line entry point: datasets, training, evaluation, analysis, export.

Exit codes: 0 success, 2 unusable configuration (message names the key or
path), 3 missing prerequisite artifact, 1 anything else. Artifacts are
written atomically (temp file + rename) and every file carries the config
hash for provenance.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__, analysis, graphs, managers, toy, vae
from . import env as environment
from .config import ConfigError, RunConfig, load_run_config

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_MISSING = 3


class MissingArtifact(RuntimeError):
    pass


def log(msg: str) -> None:
    print(f"[netgov] {msg}", file=sys.stderr)


def atomic_write(path: str, write_fn) -> None:
    """write_fn(tmp_path); the result is renamed into place afterwards."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)),
                               suffix=".tmp")
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def resolve(out_dir: str, name: str) -> str:
    return os.path.join(out_dir, name)


def require(path: str, what: str) -> str:
    if not os.path.exists(path):
        raise MissingArtifact(f"{what} not found at {path}")
    return path


def cmd_gen_dataset(cfg: RunConfig, out_dir: str) -> None:
    v = cfg.doc["vae"]
    n = cfg.doc["env"]["n_agents"]
    if v["dataset_scheme"] == "enumerate":
        ds = graphs.enumerate_all(n, split_seed=v["dataset_seed"],
                                  val_fraction=v["val_fraction"])
    elif v["dataset_scheme"] == "sample":
        ds = graphs.sample_topologies(n, v["dataset_count"], v["dataset_seed"],
                                      val_fraction=v["val_fraction"])
    else:
        raise ConfigError(f"vae.dataset_scheme: unknown scheme {v['dataset_scheme']!r}")
    path = resolve(out_dir, cfg.doc["paths"]["dataset"])
    atomic_write(path, lambda tmp: graphs.save_dataset(ds, tmp))
    log(f"wrote {len(ds)} topologies to {path}")


def cmd_train_vae(cfg: RunConfig, out_dir: str) -> None:
    dataset_path = require(resolve(out_dir, cfg.doc["paths"]["dataset"]),
                           "topology dataset (run gen-dataset first)")
    ds = graphs.load_dataset(dataset_path, val_fraction=cfg.doc["vae"]["val_fraction"])
    result = vae.train_vae(ds, cfg.vae_train_config())
    vae_dir = resolve(out_dir, cfg.doc["paths"]["vae_dir"])
    os.makedirs(vae_dir, exist_ok=True)
    vae.save_vae(result.model, vae_dir)
    report_path = resolve(out_dir, cfg.doc["paths"]["vae_report"])
    atomic_write(
        report_path,
        lambda tmp: vae.write_report_csv(result, tmp,
                                         header_comment=f"config_hash={cfg.hash}"),
    )
    log(
        f"best epoch {result.best_epoch}, link accuracy "
        f"{result.final_accuracy:.4f}; model in {vae_dir}"
    )


def _load_vae_for(cfg: RunConfig, out_dir: str) -> tuple[vae.VaeModel, str]:
    vae_dir = resolve(out_dir, cfg.doc["paths"]["vae_dir"])
    n, d = cfg.doc["env"]["n_agents"], cfg.doc["vae"]["latent_dim"]
    if not os.path.exists(os.path.join(vae_dir, "vae.json")):
        raise MissingArtifact(
            f"vae_rl manager needs a trained autoencoder for n={n}, d={d}; "
            f"none found at {vae_dir} (run train-vae first)"
        )
    model = vae.load_vae(vae_dir)
    if model.n != n or model.latent_dim != d:
        raise MissingArtifact(
            f"autoencoder at {vae_dir} is for n={model.n}, d={model.latent_dim}; "
            f"this config needs n={n}, d={d}"
        )
    return model, vae_dir


def cmd_train_manager(cfg: RunConfig, out_dir: str) -> None:
    mgr_cfg = cfg.manager_config()
    env_cfg = cfg.env_config()
    vae_model, vae_dir = (None, None)
    if mgr_cfg.kind == "vae_rl":
        vae_model, vae_dir = _load_vae_for(cfg, out_dir)
    manager_dir = resolve(out_dir, cfg.doc["paths"]["manager_dir"])
    interval = cfg.doc["manager"]["checkpoint_interval"]
    result = managers.train_manager(
        env_cfg, mgr_cfg, vae_model=vae_model,
        checkpoint_dir=manager_dir if interval else None,
        checkpoint_interval=interval,
    )
    if mgr_cfg.kind != "random":
        managers.save_manager(result.manager, manager_dir, vae_dir=vae_dir)
    curve_path = resolve(out_dir, cfg.doc["paths"]["curve"])
    atomic_write(
        curve_path,
        lambda tmp: managers.write_curve_csv(result.curve, tmp,
                                             header_comment=f"config_hash={cfg.hash}"),
    )
    if result.curve:
        tail = np.mean([p.episode_return for p in result.curve[-100:]])
        log(f"trained {mgr_cfg.kind} for {len(result.curve)} episodes "
            f"(last-100 mean return {tail:.2f}); checkpoint in {manager_dir}")
    else:
        log(f"{mgr_cfg.kind} manager requires no training")


def _load_manager_for(cfg: RunConfig, out_dir: str):
    mgr_cfg = cfg.manager_config()
    if mgr_cfg.kind == "random":
        return managers.RandomManager(cfg.doc["env"]["n_agents"])
    manager_dir = resolve(out_dir, cfg.doc["paths"]["manager_dir"])
    require(os.path.join(manager_dir, "manifest.json"),
            f"{mgr_cfg.kind} manager checkpoint (run train-manager first)")
    vae_model, vae_dir = (None, None)
    if mgr_cfg.kind == "vae_rl":
        vae_model, vae_dir = _load_vae_for(cfg, out_dir)
    return managers.load_manager(manager_dir, mgr_cfg, vae_model=vae_model,
                                 vae_dir=vae_dir)


def cmd_eval(cfg: RunConfig, out_dir: str) -> None:
    manager = _load_manager_for(cfg, out_dir)
    env_cfg = cfg.env_config()
    summary = managers.evaluate(env_cfg, manager,
                                episodes=cfg.doc["eval"]["episodes"],
                                seed=cfg.doc["eval"]["seed"])
    traces_path = resolve(out_dir, cfg.doc["paths"]["traces"])
    atomic_write(
        traces_path,
        lambda tmp: environment.write_trace_jsonl(summary.traces, tmp,
                                                  config_hash=cfg.hash),
    )
    metrics_dir = resolve(out_dir, cfg.doc["paths"]["metrics_dir"])
    rows = analysis.summarize(
        [(manager.kind, cfg.scenario_label(), summary.traces)]
    )
    atomic_write(
        os.path.join(metrics_dir, "summary.csv"),
        lambda tmp: analysis.write_summary_csv(rows, tmp,
                                               header_comment=f"config_hash={cfg.hash}"),
    )
    log(
        f"evaluated {manager.kind} on {summary.episodes} episodes: "
        f"return {summary.mean_return:.2f} ± {summary.stderr_return:.2f} "
        f"(perf {summary.mean_performance:.2f}, cost {summary.mean_cost:.2f})"
    )


def cmd_analyze(cfg: RunConfig, out_dir: str) -> None:
    traces_path = require(resolve(out_dir, cfg.doc["paths"]["traces"]),
                          "evaluation traces (run eval first)")
    traces = environment.read_trace_jsonl(traces_path)
    metrics_dir = resolve(out_dir, cfg.doc["paths"]["metrics_dir"])
    comment = f"config_hash={cfg.hash}"

    density = analysis.density_distribution(traces)
    atomic_write(os.path.join(metrics_dir, "density.csv"),
                 lambda tmp: analysis.write_density_csv(density, tmp, comment))

    grouped = analysis.grouped_series(traces, cfg.env_config().vision_ranges)
    atomic_write(os.path.join(metrics_dir, "grouped.csv"),
                 lambda tmp: analysis.write_grouped_csv(grouped, tmp, comment))

    rows = analysis.summarize(
        [(cfg.doc["manager"]["kind"], cfg.scenario_label(), traces)]
    )
    atomic_write(os.path.join(metrics_dir, "summary.csv"),
                 lambda tmp: analysis.write_summary_csv(rows, tmp, comment))

    contrast = analysis.phase_contrast(traces)
    payload = {
        "config_hash": cfg.hash,
        "early_mean_links": contrast.early_mean_links,
        "late_mean_links": contrast.late_mean_links,
        "difference": contrast.difference,
        "t_statistic": contrast.t_statistic,
        "p_value": contrast.p_value,
        "significant": contrast.significant,
    }
    atomic_write(
        os.path.join(metrics_dir, "phase_contrast.json"),
        lambda tmp: open(tmp, "w").write(json.dumps(payload, indent=2) + "\n"),
    )
    log(f"metrics written to {metrics_dir} "
        f"(early links {contrast.early_mean_links:.2f}, "
        f"late {contrast.late_mean_links:.2f}, p={contrast.p_value:.3g})")


def cmd_toy(cfg: RunConfig, out_dir: str) -> None:
    report = toy.rank_report(toy.ToyConfig())
    print(report.format_text())
    print(report.to_json())
    path = resolve(out_dir, "toy_report.json")
    atomic_write(path, lambda tmp: open(tmp, "w").write(report.to_json() + "\n"))
    log(f"toy report written to {path}")


def cmd_trace(cfg: RunConfig, out_dir: str) -> None:
    env_cfg = cfg.env_config()
    t = cfg.doc["trace"]
    n = env_cfg.n_agents
    kind = t["policy"]
    if kind == "manager":
        manager = _load_manager_for(cfg, out_dir)
    elif kind not in ("random", "empty", "complete"):
        raise ConfigError(f"trace.policy: unknown policy {kind!r}")

    traces = []
    for i in range(t["episodes"]):
        if kind == "empty":
            policy = lambda obs: graphs.topology_from_bits(n, [0] * graphs.pair_count(n))
        elif kind == "complete":
            policy = lambda obs: graphs.topology_from_bits(n, [1] * graphs.pair_count(n))
        elif kind == "random":
            rng = np.random.default_rng(np.random.SeedSequence([t["seed"], 5, i]))
            policy = lambda obs: managers.random_topology(n, rng)
        else:
            policy = managers._greedy_policy(manager)
        traces.append(
            environment.run_episode(
                env_cfg, policy,
                episode_seed=managers.eval_episode_seed(t["seed"], i),
                episode=i, grid_landmarks=t["grid_landmarks"],
            )
        )
    path = resolve(out_dir, cfg.doc["paths"]["trace_demo"])
    atomic_write(
        path,
        lambda tmp: environment.write_trace_jsonl(traces, tmp, config_hash=cfg.hash),
    )
    log(f"wrote {len(traces)} {kind}-policy episode(s) to {path}")


COMMANDS = {
    "gen-dataset": (cmd_gen_dataset, "vae.dataset_seed"),
    "train-vae": (cmd_train_vae, "vae.seed"),
    "train-manager": (cmd_train_manager, "manager.seed"),
    "eval": (cmd_eval, "eval.seed"),
    "analyze": (cmd_analyze, None),
    "toy": (cmd_toy, None),
    "trace": (cmd_trace, "trace.seed"),
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="netgov",
        description="Latent-space governance of multi-agent communication topologies",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON overlay on the profile defaults")
    parser.add_argument("--profile", choices=("desk", "paper"), default="desk")
    parser.add_argument("--seed", type=int, help="override the subcommand's seed")
    parser.add_argument("--out", default=None,
                        help="artifact root (default runs/<profile>)")
    args = parser.parse_args(argv)

    fn, seed_key = COMMANDS[args.command]
    try:
        cfg = load_run_config(args.config, args.profile,
                              seed_override=args.seed, seed_key=seed_key)
    except ConfigError as exc:
        log(f"config error: {exc}")
        return EXIT_CONFIG

    out_dir = args.out or os.path.join("runs", args.profile)
    os.makedirs(out_dir, exist_ok=True)
    log(f"netgov {__version__} | profile={args.profile} | config_hash={cfg.hash}")
    try:
        fn(cfg, out_dir)
    except ConfigError as exc:
        log(f"config error: {exc}")
        return EXIT_CONFIG
    except MissingArtifact as exc:
        log(f"missing artifact: {exc}")
        return EXIT_MISSING
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        log(f"error: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
