"""Topologies as bit vectors, and the metrics computed over them.

A communication topology over n agents is stored as the strict upper
triangle of its adjacency matrix. This walk-through builds a few graphs,
prints their degree and betweenness vectors, and shows the link-density
bands used to summarize behavior over time.
"""

import numpy as np

from netgov.graphs import (
    betweenness,
    degrees,
    density_category,
    enumerate_all,
    flatten,
    sample_topologies,
    topology_from_bits,
    unflatten,
)

# the 3-node path 0-1-2: pairs are ordered (0,1), (0,2), (1,2)
path = topology_from_bits(3, [1, 0, 1])
print("path adjacency:\n", unflatten(path))
print("degrees:", degrees(path))
print("betweenness:", betweenness(path))  # center scores 1.0, leaves 2/3

# flatten/unflatten are inverse bijections
star = flatten(np.array([[0, 1, 1, 1], [1, 0, 0, 0], [1, 0, 0, 0], [1, 0, 0, 0]]))
print("\nstar bits:", star.bit_string(), "degrees:", degrees(star))

# the complete 4-node action space has 2^6 = 64 members
space = enumerate_all(4)
print("\nenumerated 4-node topologies:", len(space))

# larger spaces are sampled with a density-stratified scheme: p ~ U[0,1],
# then each link is Bernoulli(p), so sparse and dense graphs both appear
ds = sample_topologies(10, count=1000, seed=0)
links = [t.link_count for t in ds.topologies]
print("\nsampled n=10 link counts: mean", np.mean(links), "range", min(links), max(links))

bands = {}
for t in ds.topologies:
    bands[density_category(t).value] = bands.get(density_category(t).value, 0) + 1
print("density bands:", dict(sorted(bands.items())))
