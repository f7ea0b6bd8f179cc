"""Weighted undirected graph container and weight-level transforms.

The adjacency is stored in CSR form with both directions of every edge, plus
per-node prefix sums of the adjacency weights so weight-proportional
transitions can be sampled with one binary search per step.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .errors import EmptyGraph, RejectedEdge

__all__ = [
    "WeightedGraph",
    "NodeStats",
    "build_graph",
    "node_stats",
    "shuffle_weights",
    "threshold_by_percentile",
    "connected_components",
    "component_stats",
]


@dataclass(frozen=True)
class WeightedGraph:
    """Immutable simple undirected graph with positive edge weights.

    ``edges_u/edges_v/edges_w`` keep the edges in input order (the canonical
    iteration order for correlation pairs). ``indptr/indices/weights`` is the
    symmetric CSR adjacency; ``cum_weights`` holds, per node, the running sum
    of that node's adjacency weights.
    """

    node_count: int
    edges_u: np.ndarray
    edges_v: np.ndarray
    edges_w: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    cum_weights: np.ndarray
    labels: tuple[str, ...] | None = None

    @property
    def edge_count(self) -> int:
        return int(self.edges_u.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def neighbor_weights(self, u: int) -> np.ndarray:
        return self.weights[self.indptr[u] : self.indptr[u + 1]]

    def fingerprint(self) -> str:
        h = hashlib.blake2b(digest_size=8)
        h.update(np.int64(self.node_count).tobytes())
        h.update(self.edges_u.tobytes())
        h.update(self.edges_v.tobytes())
        h.update(self.edges_w.tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class NodeStats:
    """Per-node degree and strength (sum of incident edge weights)."""

    degree: np.ndarray
    strength: np.ndarray


def _as_edge_arrays(
    edge_list: Iterable[tuple[int, int, float]] | tuple[np.ndarray, np.ndarray, np.ndarray],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(edge_list, tuple) and len(edge_list) == 3 and isinstance(edge_list[0], np.ndarray):
        u, v, w = edge_list
        return (
            np.ascontiguousarray(u, dtype=np.int32),
            np.ascontiguousarray(v, dtype=np.int32),
            np.ascontiguousarray(w, dtype=np.float64),
        )
    rows = list(edge_list)
    if not rows:
        empty_i = np.empty(0, dtype=np.int32)
        return empty_i, empty_i.copy(), np.empty(0, dtype=np.float64)
    u = np.array([r[0] for r in rows], dtype=np.int64)
    v = np.array([r[1] for r in rows], dtype=np.int64)
    w = np.array([r[2] for r in rows], dtype=np.float64)
    return u.astype(np.int32), v.astype(np.int32), w


def build_graph(
    edge_list: Iterable[tuple[int, int, float]] | tuple[np.ndarray, np.ndarray, np.ndarray],
    node_count: int,
    labels: Sequence[str] | None = None,
) -> WeightedGraph:
    """Validate an edge list and assemble the CSR adjacency.

    Edge order is preserved. Raises RejectedEdge for self-loops, duplicate
    unordered pairs, ids outside [0, node_count) and non-positive or
    non-finite weights, reporting the offending edge.
    """
    if node_count < 1:
        raise RejectedEdge(f"node_count must be >= 1, got {node_count}")
    u, v, w = _as_edge_arrays(edge_list)
    n = int(node_count)
    m = u.shape[0]

    if m:
        bad = (u < 0) | (u >= n) | (v < 0) | (v >= n)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise RejectedEdge(
                f"edge {i}: id out of range for N={n}: ({int(u[i])}, {int(v[i])}, {w[i]})"
            )
        loops = u == v
        if loops.any():
            i = int(np.flatnonzero(loops)[0])
            raise RejectedEdge(f"edge {i}: self-loop ({int(u[i])}, {int(v[i])}, {w[i]})")
        badw = ~np.isfinite(w) | (w <= 0)
        if badw.any():
            i = int(np.flatnonzero(badw)[0])
            raise RejectedEdge(
                f"edge {i}: non-positive or non-finite weight ({int(u[i])}, {int(v[i])}, {w[i]})"
            )
        lo = np.minimum(u, v).astype(np.int64)
        hi = np.maximum(u, v).astype(np.int64)
        key = lo * n + hi
        uniq, counts = np.unique(key, return_counts=True)
        if (counts > 1).any():
            dup_key = int(uniq[np.flatnonzero(counts > 1)[0]])
            i = int(np.flatnonzero(key == dup_key)[1])
            raise RejectedEdge(
                f"edge {i}: duplicate unordered pair ({int(u[i])}, {int(v[i])}, {w[i]})"
            )

    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    ww = np.concatenate([w, w])
    order = np.argsort(src, kind="stable")
    indices = dst[order].astype(np.int32)
    weights = ww[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    if m:
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    cum_weights = _segment_cumsum(weights, indptr)

    if labels is not None:
        if len(labels) != n:
            raise RejectedEdge(f"got {len(labels)} labels for N={n}")
        labels = tuple(labels)

    for arr in (u, v, w, indptr, indices, weights, cum_weights):
        arr.flags.writeable = False
    return WeightedGraph(n, u, v, w, indptr, indices, weights, cum_weights, labels)


def _segment_cumsum(values: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """Per-node running sums of adjacency values, restarting at each node."""
    out = np.cumsum(values)
    if out.shape[0]:
        base = np.repeat(np.concatenate([[0.0], out[indptr[1:-1] - 1]]), np.diff(indptr))
        out -= base
    return out


def node_stats(g: WeightedGraph) -> NodeStats:
    """Degree and strength per node, computed from the edge list."""
    degree = np.diff(g.indptr).astype(np.int64)
    strength = np.bincount(g.edges_u, weights=g.edges_w, minlength=g.node_count)
    strength += np.bincount(g.edges_v, weights=g.edges_w, minlength=g.node_count)
    return NodeStats(degree=degree, strength=strength)


def shuffle_weights(g: WeightedGraph, seed: int) -> WeightedGraph:
    """Permute the weight multiset uniformly over the same edge set."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(g.edge_count)
    return build_graph((g.edges_u, g.edges_v, g.edges_w[perm]), g.node_count, g.labels)


def threshold_by_percentile(g: WeightedGraph, q: float) -> WeightedGraph:
    """Drop every edge whose weight is strictly below the q-quantile.

    The quantile interpolates linearly between order statistics; ties at the
    threshold survive, so q=0 is a no-op. Isolated nodes stay in the node set.
    """
    if not 0.0 <= q < 1.0:
        raise ValueError(f"q must be in [0, 1), got {q}")
    if g.edge_count == 0:
        raise EmptyGraph("cannot threshold a graph with no edges")
    t = np.quantile(g.edges_w, q)
    keep = g.edges_w >= t
    if not keep.any():
        raise EmptyGraph(f"no edges survive the {q:.2f}-quantile threshold")
    return build_graph(
        (g.edges_u[keep], g.edges_v[keep], g.edges_w[keep]), g.node_count, g.labels
    )


@njit(cache=True, nogil=True)
def _components(indptr, indices):  # pragma: no cover - exercised via wrapper
    n = indptr.shape[0] - 1
    labels = np.full(n, -1, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    comp = 0
    for root in range(n):
        if labels[root] >= 0:
            continue
        labels[root] = comp
        top = 0
        stack[top] = root
        top += 1
        while top > 0:
            top -= 1
            u = stack[top]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if labels[v] < 0:
                    labels[v] = comp
                    stack[top] = v
                    top += 1
        comp += 1
    return labels


def connected_components(g: WeightedGraph) -> np.ndarray:
    """Component label per node (labels are dense, in discovery order)."""
    return _components(g.indptr, g.indices)


def component_stats(g: WeightedGraph) -> dict:
    """Summary used in run metadata: component count, largest size, isolates."""
    labels = connected_components(g)
    sizes = np.bincount(labels)
    return {
        "n_components": int(sizes.shape[0]),
        "largest_component": int(sizes.max()) if sizes.shape[0] else 0,
        "n_isolated": int((np.diff(g.indptr) == 0).sum()),
    }
