"""Undirected simple-graph topologies as upper-triangle bit vectors, plus metrics.

A topology over n nodes is the strict upper triangle of its adjacency matrix,
flattened row-major: pair index k runs over (0,1), (0,2), ..., (n-2, n-1), so
L = n(n-1)/2 bits. Bit order doubles as the binary encoding used by the
enumerated action space (pair k -> bit k, least significant first).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

ENUMERATION_LIMIT = 20  # max L for exhaustive enumeration (2^20 graphs)


class DensityCategory(enum.Enum):
    SPARSE = "sparse"
    MID_DENSE = "mid_dense"
    DENSE = "dense"
    VERY_DENSE = "very_dense"


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def pair_indices(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True)
class Topology:
    """n nodes and one bit per unordered node pair."""

    n: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != pair_count(self.n):
            raise ValueError(
                f"expected {pair_count(self.n)} bits for n={self.n}, got {len(self.bits)}"
            )
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("topology bits must be 0/1")

    @property
    def link_count(self) -> int:
        return int(sum(self.bits))

    def bit_string(self) -> str:
        return "".join(str(b) for b in self.bits)


def topology_from_bits(n: int, bits) -> Topology:
    return Topology(n, tuple(int(b) for b in bits))


def topology_from_index(n: int, index: int) -> Topology:
    """Binary encoding: bit k of `index` is pair k; 0 = empty, 2^L - 1 = complete."""
    L = pair_count(n)
    if not 0 <= index < 2**L:
        raise ValueError(f"index {index} out of range for n={n}")
    return Topology(n, tuple((index >> k) & 1 for k in range(L)))


def topology_index(t: Topology) -> int:
    return sum(b << k for k, b in enumerate(t.bits))


def flatten(matrix: np.ndarray) -> Topology:
    """Adjacency matrix -> Topology; rejects asymmetric or self-loop input."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got {m.shape}")
    if not np.isin(m, (0, 1)).all():
        raise ValueError("adjacency entries must be 0/1")
    if np.any(np.diag(m) != 0):
        raise ValueError("adjacency diagonal must be zero (no self links)")
    if np.any(m != m.T):
        raise ValueError("adjacency matrix must be symmetric")
    n = m.shape[0]
    return Topology(n, tuple(int(m[i, j]) for i, j in pair_indices(n)))


def unflatten(t: Topology) -> np.ndarray:
    m = np.zeros((t.n, t.n), dtype=np.int64)
    for (i, j), b in zip(pair_indices(t.n), t.bits):
        m[i, j] = m[j, i] = b
    return m


@dataclass
class TopologyDataset:
    """Topologies plus provenance and a seeded train/validation split."""

    n: int
    topologies: list[Topology]
    seed: int
    scheme: str
    val_fraction: float = 0.1
    train_idx: np.ndarray = field(default=None, repr=False)
    val_idx: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if any(t.n != self.n for t in self.topologies):
            raise ValueError("all topologies in a dataset must share n")
        if self.train_idx is None:
            self.train_idx, self.val_idx = _split_indices(
                len(self.topologies), self.val_fraction, self.seed
            )

    def __len__(self) -> int:
        return len(self.topologies)


def _split_indices(count: int, val_fraction: float, seed: int):
    # Validation may come out empty for tiny datasets; training never does.
    perm = np.random.default_rng(seed).permutation(count)
    n_val = min(int(math.floor(count * val_fraction)), count - 1)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def enumerate_all(n: int, split_seed: int = 0, val_fraction: float = 0.1) -> TopologyDataset:
    """Every topology on n nodes; refused when 2^L would blow up."""
    L = pair_count(n)
    if L > ENUMERATION_LIMIT:
        raise ValueError(
            f"enumerate_all(n={n}) would generate 2^{L} topologies; "
            f"use sample_topologies() for n with more than {ENUMERATION_LIMIT} pairs"
        )
    topologies = [topology_from_index(n, i) for i in range(2**L)]
    return TopologyDataset(n, topologies, split_seed, "enumerate", val_fraction)


def sample_topologies(
    n: int, count: int, seed: int, val_fraction: float = 0.1
) -> TopologyDataset:
    """Density-stratified sampling: p ~ U[0,1] per sample, links ~ Bernoulli(p).

    The uniform mixture keeps sparse and dense regimes represented, which a
    flat Bernoulli(0.5) would starve.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    L = pair_count(n)
    topologies = []
    for _ in range(count):
        p = rng.uniform()
        topologies.append(topology_from_bits(n, rng.random(L) < p))
    return TopologyDataset(n, topologies, seed, "bernoulli-mixture", val_fraction)


def degrees(t: Topology) -> np.ndarray:
    return unflatten(t).sum(axis=1)


def _bfs_counts(adj: list[list[int]], s: int, n: int):
    """Distances and shortest-path counts from s."""
    dist = np.full(n, -1, dtype=np.int64)
    sigma = np.zeros(n, dtype=np.float64)
    dist[s] = 0
    sigma[s] = 1.0
    frontier = [s]
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        frontier = nxt
    return dist, sigma


def betweenness(t: Topology) -> np.ndarray:
    """Endpoint-inclusive betweenness, normalized by the total pair count.

    BC(v) = (1/P) * sum over connected unordered pairs {s,t} of
    sigma_st(v)/sigma_st, where an endpoint counts as on-path with ratio 1
    and P = n(n-1)/2. Unreachable pairs contribute nothing.
    """
    n = t.n
    m = unflatten(t)
    adj = [list(np.flatnonzero(m[v])) for v in range(n)]
    dist = np.empty((n, n), dtype=np.int64)
    sigma = np.empty((n, n), dtype=np.float64)
    for s in range(n):
        dist[s], sigma[s] = _bfs_counts(adj, s, n)
    bc = np.zeros(n, dtype=np.float64)
    for s in range(n):
        for u in range(s + 1, n):
            if dist[s][u] < 0:
                continue
            bc[s] += 1.0
            bc[u] += 1.0
            for v in range(n):
                if v in (s, u):
                    continue
                if dist[s][v] >= 0 and dist[s][v] + dist[u][v] == dist[s][u]:
                    bc[v] += sigma[s][v] * sigma[u][v] / sigma[s][u]
    return bc / pair_count(n)


# Link-count boundaries for the n=10 study; other n scale by L/45, floored.
_SPARSE_MAX, _MID_MAX, _DENSE_MAX = 9, 17, 26


def density_boundaries(n: int) -> tuple[int, int, int]:
    L = pair_count(n)
    return (
        math.floor(_SPARSE_MAX * L / 45),
        math.floor(_MID_MAX * L / 45),
        math.floor(_DENSE_MAX * L / 45),
    )


def density_category(t: Topology) -> DensityCategory:
    """sparse <= 9 links, mid-dense 10-17, dense 18-26, very dense >= 27 (n=10)."""
    s_max, m_max, d_max = density_boundaries(t.n)
    links = t.link_count
    if links <= s_max:
        return DensityCategory.SPARSE
    if links <= m_max:
        return DensityCategory.MID_DENSE
    if links <= d_max:
        return DensityCategory.DENSE
    return DensityCategory.VERY_DENSE


def save_dataset(ds: TopologyDataset, path: str) -> None:
    """Text format: 'n=<int>' line, 'seed=<int>' line, one bit string per line."""
    lines = [f"n={ds.n}", f"seed={ds.seed}"]
    lines += [t.bit_string() for t in ds.topologies]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset(path: str, val_fraction: float = 0.1) -> TopologyDataset:
    """Read the text format; the split is re-derived from the recorded seed."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("n=") or not lines[1].startswith("seed="):
        raise ValueError(f"{path}: expected 'n=' and 'seed=' header lines")
    n = int(lines[0][2:])
    seed = int(lines[1][5:])
    L = pair_count(n)
    topologies = []
    for ln in lines[2:]:
        if len(ln) != L or set(ln) - {"0", "1"}:
            raise ValueError(f"{path}: bad topology line {ln!r}")
        topologies.append(topology_from_bits(n, (int(c) for c in ln)))
    return TopologyDataset(n, topologies, seed, "file", val_fraction)
