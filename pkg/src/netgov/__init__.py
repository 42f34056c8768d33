"""Latent-space governance of multi-agent communication topologies.

A small numpy/scipy stack: dense nets with exact gradients, topology
encodings and metrics, an autoencoder over topologies, a partially
observable particle environment, latent-action and Q-learning managers,
and post-hoc trace analysis.
"""

__version__ = "0.1.0"
