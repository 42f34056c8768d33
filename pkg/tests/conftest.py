import time

import pytest

from netgov import graphs, vae
from netgov.config import PROFILES, RunConfig
from netgov.managers import RandomManager, evaluate, train_manager

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def desk() -> RunConfig:
    import copy

    return RunConfig(copy.deepcopy(PROFILES["desk"]), "desk")


@pytest.fixture(scope="session")
def desk_vae(desk):
    """The desk-profile autoencoder run used by the acceptance criteria."""
    dataset = graphs.enumerate_all(
        desk.doc["env"]["n_agents"],
        split_seed=desk.doc["vae"]["dataset_seed"],
        val_fraction=desk.doc["vae"]["val_fraction"],
    )
    start = time.perf_counter()
    result = vae.train_vae(dataset, desk.vae_train_config())
    seconds = time.perf_counter() - start
    return {"dataset": dataset, "result": result, "seconds": seconds}


@pytest.fixture(scope="session")
def desk_manager(desk, desk_vae, tmp_path_factory):
    """Desk-profile manager training plus the evaluation pair for criteria 5-8."""
    env_cfg = desk.env_config()
    start = time.perf_counter()
    trained = train_manager(env_cfg, desk.manager_config(),
                            vae_model=desk_vae["result"].model)
    train_seconds = time.perf_counter() - start

    episodes = desk.doc["eval"]["episodes"]
    seed = desk.doc["eval"]["seed"]
    learned = evaluate(env_cfg, trained.manager, episodes=episodes, seed=seed)
    coin = evaluate(env_cfg, RandomManager(env_cfg.n_agents),
                    episodes=episodes, seed=seed)

    out_dir = tmp_path_factory.mktemp("desk_run")
    vae_dir = out_dir / "vae"
    vae.save_vae(desk_vae["result"].model, str(vae_dir))
    from netgov.managers import save_manager

    save_manager(trained.manager, str(out_dir / "manager"), vae_dir=str(vae_dir))
    return {
        "trained": trained,
        "train_seconds": train_seconds,
        "learned": learned,
        "random": coin,
        "out_dir": out_dir,
    }
