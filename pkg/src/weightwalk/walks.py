"""Random-walk kernels (RW, SRW, WRW) and corpus generation.

All three kernels are first-order. RW picks a neighbor uniformly, SRW
proportionally to the neighbor's strength, WRW proportionally to the edge
weight. Sampling uses per-node cumulative bias arrays and binary search;
the per-walk randomness comes from a counter-based Philox stream keyed by
(seed, node, walk index, step), so corpora are bit-reproducible no matter
how generation is scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from numba import njit

from .errors import DegenerateParams, IsolatedNode
from .graph import WeightedGraph, _segment_cumsum, node_stats

__all__ = ["KERNELS", "WalkConfig", "WalkCorpus", "transition_distribution", "sample_walk", "build_corpus"]

KERNELS = ("rw", "srw", "wrw")


@dataclass(frozen=True)
class WalkConfig:
    kernel: str = "wrw"
    walks_per_node: int = 16
    walk_length: int = 128
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kernel", self.kernel.lower())
        if self.kernel not in KERNELS:
            raise DegenerateParams(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.walks_per_node < 1:
            raise DegenerateParams(f"walks_per_node must be >= 1, got {self.walks_per_node}")
        if self.walk_length < 2:
            raise DegenerateParams(f"walk_length must be >= 2, got {self.walk_length}")


@dataclass(frozen=True)
class WalkCorpus:
    """Fixed-length walks as a dense int32 matrix.

    Row j holds the walk, padded with -1 past ``lengths[j]`` (a walk is
    shorter than ``walk_length`` only when its start node is isolated).
    """

    walks: np.ndarray
    lengths: np.ndarray
    n_nodes: int
    graph_fingerprint: str
    config: WalkConfig

    @property
    def n_sequences(self) -> int:
        return int(self.walks.shape[0])

    @property
    def n_tokens(self) -> int:
        return int(self.lengths.sum())

    @property
    def n_truncated(self) -> int:
        return int((self.lengths < self.walks.shape[1]).sum())

    def sequences(self):
        for j in range(self.walks.shape[0]):
            yield self.walks[j, : self.lengths[j]].tolist()

    def write_text(self, path: str | Path) -> None:
        """One walk per line, space-separated node ids."""
        with open(path, "w", encoding="utf-8") as fh:
            for seq in self.sequences():
                fh.write(" ".join(map(str, seq)))
                fh.write("\n")


def _kernel_bias_cum(g: WeightedGraph, kernel: str) -> np.ndarray:
    """Per-node cumulative bias over adjacency entries; empty array for RW."""
    if kernel == "rw":
        return np.empty(0, dtype=np.float64)
    if kernel == "wrw":
        return g.cum_weights
    strength = node_stats(g).strength
    return _segment_cumsum(strength[g.indices], g.indptr)


def transition_distribution(g: WeightedGraph, u: int, kernel: str) -> np.ndarray:
    """Probability vector over the neighbors of u, in adjacency order.

    Biases are scaled by their maximum before normalizing, so kernels whose
    biases are equal across neighbors yield exactly the uniform RW vector.
    """
    kernel = kernel.lower()
    if kernel not in KERNELS:
        raise DegenerateParams(f"kernel must be one of {KERNELS}, got {kernel!r}")
    k = int(g.indptr[u + 1] - g.indptr[u])
    if k == 0:
        raise IsolatedNode(f"node {u} has no neighbors")
    if kernel == "rw":
        bias = np.ones(k, dtype=np.float64)
    elif kernel == "wrw":
        bias = g.neighbor_weights(u).astype(np.float64)
    else:
        bias = node_stats(g).strength[g.neighbors(u)]
    bias = bias / bias.max()
    return bias / bias.sum()


@njit(cache=True, nogil=True, inline="always")
def _bisect_above(arr, lo, hi, x):  # pragma: no cover - numba
    while lo < hi:
        mid = (lo + hi) >> 1
        if x < arr[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True, nogil=True)
def _walk_batch(indptr, indices, cum, starts, uniforms, walks, lengths, use_cum):  # pragma: no cover - numba
    n_walks, max_len = walks.shape
    for j in range(n_walks):
        u = starts[j]
        walks[j, 0] = u
        if indptr[u + 1] == indptr[u]:
            lengths[j] = 1
            continue
        lengths[j] = max_len
        for step in range(1, max_len):
            lo = indptr[u]
            hi = indptr[u + 1]
            r = uniforms[j, step - 1]
            if use_cum:
                idx = _bisect_above(cum, lo, hi, r * cum[hi - 1])
            else:
                idx = lo + np.int64(r * (hi - lo))
            if idx >= hi:
                idx = hi - 1
            u = indices[idx]
            walks[j, step] = u
    return walks


def _run_walks(g: WeightedGraph, starts: np.ndarray, uniforms: np.ndarray, kernel: str):
    cum = _kernel_bias_cum(g, kernel)
    walks = np.full((starts.shape[0], uniforms.shape[1] + 1), -1, dtype=np.int32)
    lengths = np.zeros(starts.shape[0], dtype=np.int32)
    _walk_batch(g.indptr, g.indices, cum, starts, uniforms, walks, lengths, kernel != "rw")
    return walks, lengths


def sample_walk(
    g: WeightedGraph, start: int, cfg: WalkConfig, stream: np.random.Generator
) -> np.ndarray:
    """One walk from ``start``; singleton when the start node is isolated."""
    if not 0 <= start < g.node_count:
        raise DegenerateParams(f"start node {start} outside [0, {g.node_count})")
    uniforms = stream.random((1, cfg.walk_length - 1))
    walks, lengths = _run_walks(g, np.array([start], dtype=np.int32), uniforms, cfg.kernel)
    return walks[0, : lengths[0]].copy()


def build_corpus(g: WeightedGraph, cfg: WalkConfig) -> WalkCorpus:
    """walks_per_node walks from every node, node-major order.

    Walk i of node u reads row u * walks_per_node + i of a Philox-generated
    uniform matrix keyed by cfg.seed, making the corpus a pure function of
    (graph, config).
    """
    n_walks = g.node_count * cfg.walks_per_node
    starts = np.repeat(np.arange(g.node_count, dtype=np.int32), cfg.walks_per_node)
    gen = np.random.Generator(np.random.Philox(key=cfg.seed))
    uniforms = gen.random((n_walks, cfg.walk_length - 1))
    walks, lengths = _run_walks(g, starts, uniforms, cfg.kernel)
    return WalkCorpus(
        walks=walks,
        lengths=lengths,
        n_nodes=g.node_count,
        graph_fingerprint=g.fingerprint(),
        config=cfg,
    )
