"""A miniature end-to-end run: autoencoder, manager, evaluation, analysis.

This is the full pipeline at toy sizes (short training, few episodes) so it
finishes in about a minute. The real desk-scale runs go through the CLI:

    netgov gen-dataset && netgov train-vae && netgov train-manager
    netgov eval && netgov analyze
"""

import numpy as np

from netgov.analysis import density_distribution, phase_contrast, summarize
from netgov.env import EnvConfig
from netgov.graphs import enumerate_all
from netgov.managers import ManagerConfig, RandomManager, evaluate, train_manager
from netgov.vae import VaeTrainConfig, train_vae

dataset = enumerate_all(4, split_seed=0)
vae_result = train_vae(
    dataset,
    VaeTrainConfig(latent_dim=6, enc_hidden=(128, 64), dec_hidden=(64, 128),
                   epochs=300, batch_size=16, beta=0.25, seed=0),
)
print(f"autoencoder: accuracy {vae_result.final_accuracy:.2f}")

env = EnvConfig(n_agents=4, vision_ranges=1.0)
cfg = ManagerConfig(kind="vae_rl", episodes=150, warmup=500, seed=0,
                    actor_hidden=(32, 32), critic_hidden=(64, 32),
                    trunk_hidden=(64, 32))
result = train_manager(env, cfg, vae_model=vae_result.model)
returns = [p.episode_return for p in result.curve]
print(f"manager: first-30 mean {np.mean(returns[:30]):.1f}, "
      f"last-30 mean {np.mean(returns[-30:]):.1f}")

learned = evaluate(env, result.manager, episodes=30, seed=1000)
coin = evaluate(env, RandomManager(4), episodes=30, seed=1000)
for row in summarize([("vae_rl", "vision_1", learned.traces),
                      ("random", "vision_1", coin.traces)]):
    print(f"{row.method:>7}: return {row.mean_return:8.2f} ± {row.stderr:.2f} "
          f"(perf {row.mean_perf:.2f}, cost {row.mean_cost:.2f})")

density = density_distribution(learned.traces)
contrast = phase_contrast(learned.traces)
print(f"links early {contrast.early_mean_links:.2f} vs late "
      f"{contrast.late_mean_links:.2f} (p={contrast.p_value:.3g})")
