"""Weighted graph families: ER, SBM, Waxman, Barabasi-Albert, complete-from-features.

Every generator is a pure function of its parameters and seed. Parameters are
stated as a target size and average degree; each model solves for its own
native parameters to hit that target.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CalibrationFailed, DegenerateParams
from .graph import WeightedGraph, build_graph

__all__ = [
    "WeightDistSpec",
    "gen_er",
    "gen_sbm",
    "gen_waxman",
    "waxman_edge_probability",
    "gen_ba",
    "gen_complete_from_features",
    "complete_graph_from_feature_matrix",
    "build_model_graph",
    "MODEL_NAMES",
]

_WEIGHT_DIST_DEFAULTS = {
    "uniform": {"low": 0.1, "high": 1.0},
    "normal": {"mean": 0.55, "sd": 0.15},
    "exponential": {"scale": 0.45},
}


@dataclass(frozen=True)
class WeightDistSpec:
    """Edge-weight distribution for the ER model.

    Defaults: uniform on [0.1, 1], normal(0.55, 0.15), exponential(0.45).
    Non-positive draws are resampled so every weight is strictly positive.
    """

    kind: str = "uniform"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _WEIGHT_DIST_DEFAULTS:
            raise DegenerateParams(
                f"unknown weight distribution {self.kind!r}; "
                f"expected one of {sorted(_WEIGHT_DIST_DEFAULTS)}"
            )
        merged = dict(_WEIGHT_DIST_DEFAULTS[self.kind])
        merged.update(self.params)
        object.__setattr__(self, "params", merged)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        p = self.params
        if self.kind == "uniform":
            return rng.uniform(p["low"], p["high"], size)
        if self.kind == "normal":
            draw = rng.normal(p["mean"], p["sd"], size)
        else:
            draw = rng.exponential(p["scale"], size)
        bad = draw <= 0
        while bad.any():
            if self.kind == "normal":
                draw[bad] = rng.normal(p["mean"], p["sd"], int(bad.sum()))
            else:
                draw[bad] = rng.exponential(p["scale"], int(bad.sum()))
            bad = draw <= 0
        return draw


def _bernoulli_pairs(n: int, rng: np.random.Generator, prob_row) -> tuple[np.ndarray, np.ndarray]:
    """Sample edges over all pairs u<v; prob_row(u) gives P(edge) vs v in u+1..n-1."""
    us, vs = [], []
    for u in range(n - 1):
        p = prob_row(u)
        hits = np.flatnonzero(rng.random(n - 1 - u) < p)
        if hits.shape[0]:
            us.append(np.full(hits.shape[0], u, dtype=np.int32))
            vs.append((hits + u + 1).astype(np.int32))
    if not us:
        empty = np.empty(0, dtype=np.int32)
        return empty, empty.copy()
    return np.concatenate(us), np.concatenate(vs)


def gen_er(
    n: int, target_k: float, wd: WeightDistSpec | str = "uniform", seed: int = 0
) -> WeightedGraph:
    """G(n, p) with p = target_k / (n - 1) and i.i.d. weights from ``wd``."""
    if n < 2:
        raise DegenerateParams(f"ER needs n >= 2, got {n}")
    p = target_k / (n - 1)
    if not 0.0 < p <= 1.0:
        raise DegenerateParams(f"edge probability {p} outside (0, 1] for n={n}, k={target_k}")
    if isinstance(wd, str):
        wd = WeightDistSpec(wd)
    rng = np.random.default_rng(seed)
    u, v = _bernoulli_pairs(n, rng, lambda _: p)
    w = wd.sample(rng, u.shape[0])
    return build_graph((u, v, w), n)


def _sbm_blocks(n: int, blocks: int) -> np.ndarray:
    sizes = np.full(blocks, n // blocks, dtype=np.int64)
    sizes[: n % blocks] += 1
    return np.repeat(np.arange(blocks), sizes)


def solve_sbm_probabilities(n: int, target_k: float, ratio: float, blocks: int = 5) -> tuple[float, float]:
    """Solve p_in, p_out = ratio * p_in so the expected mean degree is target_k."""
    if not 0.0 < ratio < 1.0:
        raise DegenerateParams(f"p_out/p_in ratio must be in (0, 1), got {ratio}")
    sizes = np.bincount(_sbm_blocks(n, blocks))
    intra = float((sizes * (sizes - 1)).sum()) / n
    inter = float((sizes * (n - sizes)).sum()) / n
    p_in = target_k / (intra + ratio * inter)
    if not 0.0 < p_in <= 1.0:
        raise DegenerateParams(
            f"solved p_in={p_in:.4f} outside (0, 1] for n={n}, k={target_k}, ratio={ratio}"
        )
    return p_in, ratio * p_in


def gen_sbm(
    n: int,
    target_k: float,
    ratio: float,
    seed: int = 0,
    blocks: int = 5,
    weight_mode: str = "jitter",
) -> WeightedGraph:
    """Five-block SBM; each edge's weight is its block-pair connection probability.

    weight_mode "jitter" multiplies the probability by an independent uniform
    factor in [0.5, 1.5] so the weight multiset is not two-valued; "exact"
    stores the bare probability.
    """
    if weight_mode not in ("jitter", "exact"):
        raise DegenerateParams(f"weight_mode must be 'jitter' or 'exact', got {weight_mode!r}")
    p_in, p_out = solve_sbm_probabilities(n, target_k, ratio, blocks)
    block = _sbm_blocks(n, blocks)
    rng = np.random.default_rng(seed)
    u, v = _bernoulli_pairs(n, rng, lambda uu: np.where(block[uu + 1 :] == block[uu], p_in, p_out))
    w = np.where(block[u] == block[v], p_in, p_out)
    if weight_mode == "jitter":
        w = w * rng.uniform(0.5, 1.5, u.shape[0])
    return build_graph((u, v, w.astype(np.float64)), n)


def waxman_edge_probability(d, alpha: float, beta: float):
    """Connection probability alpha * exp(-d / beta) for pair distance d."""
    return alpha * np.exp(-np.asarray(d, dtype=np.float64) / beta)


def gen_waxman(n: int, target_k: float, seed: int = 0, beta: float = 0.3) -> WeightedGraph:
    """Waxman geometric graph on the unit square, weights equal to edge probabilities.

    alpha is solved so the expected edge count is n * target_k / 2 (the sum of
    pair probabilities is linear in alpha), capped at 1 with a warning when
    the target is out of reach.
    """
    if n < 2:
        raise DegenerateParams(f"Waxman needs n >= 2, got {n}")
    if beta <= 0:
        raise DegenerateParams(f"beta must be positive, got {beta}")
    rng = np.random.default_rng(seed)
    pos = rng.random((n, 2))

    prob_sum = 0.0
    for u in range(n - 1):
        d = np.hypot(pos[u + 1 :, 0] - pos[u, 0], pos[u + 1 :, 1] - pos[u, 1])
        prob_sum += float(np.exp(-d / beta).sum())
    target_edges = n * target_k / 2.0
    if 2.0 * prob_sum / n < 0.5 * target_k:
        raise CalibrationFailed(
            f"alpha=1 reaches mean degree {2.0 * prob_sum / n:.2f} < half the target {target_k}"
        )
    alpha = target_edges / prob_sum
    if alpha > 1.0:
        warnings.warn(
            f"Waxman target degree {target_k} needs alpha={alpha:.3f} > 1; capping at 1",
            stacklevel=2,
        )
        alpha = 1.0

    us, vs, ws = [], [], []
    for u in range(n - 1):
        d = np.hypot(pos[u + 1 :, 0] - pos[u, 0], pos[u + 1 :, 1] - pos[u, 1])
        p = waxman_edge_probability(d, alpha, beta)
        hits = np.flatnonzero(rng.random(n - 1 - u) < p)
        if hits.shape[0]:
            us.append(np.full(hits.shape[0], u, dtype=np.int32))
            vs.append((hits + u + 1).astype(np.int32))
            ws.append(p[hits])
    if not us:
        raise CalibrationFailed("Waxman realization produced no edges")
    return build_graph((np.concatenate(us), np.concatenate(vs), np.concatenate(ws)), n)


def gen_ba(n: int, m: int, variant: str = "wsf", seed: int = 0) -> WeightedGraph:
    """Preferential attachment from an m-clique seed, weighted per variant.

    "wsf": after growth, each non-seed node's m attachment edges are weighted
    by the final degrees of its targets, normalized to sum to 1.
    "we": the same normalization, but with degrees as they stand right after
    the node's connections are made.
    Seed-clique edges carry weight 1/m. Preferential attachment draws from a
    repeated-endpoints urn, rejecting repeats within one node's target set.
    """
    variant = variant.lower()
    if variant not in ("wsf", "we"):
        raise DegenerateParams(f"variant must be 'wsf' or 'we', got {variant!r}")
    if m < 1 or m >= n:
        raise DegenerateParams(f"need n > m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)

    deg = np.zeros(n, dtype=np.int64)
    urn: list[int] = []
    pair_w: dict[tuple[int, int], float] = {}
    order: list[tuple[int, int]] = []

    def add_edge(a: int, b: int, w: float) -> None:
        key = (a, b) if a < b else (b, a)
        if key in pair_w:
            pair_w[key] += w
        else:
            pair_w[key] = w
            order.append(key)
        deg[a] += 1
        deg[b] += 1
        urn.append(a)
        urn.append(b)

    for i in range(m):
        for j in range(i + 1, m):
            add_edge(i, j, 1.0 / m)

    attach: dict[int, list[int]] = {}
    for i in range(m, n):
        if urn:
            chosen: list[int] = []
            while len(chosen) < m:
                t = urn[int(rng.integers(len(urn)))]
                if t not in chosen:
                    chosen.append(t)
        else:
            chosen = list(range(i))  # m=1 bootstrap: no clique edges yet
        for t in chosen:
            add_edge(i, t, 0.0)
        attach[i] = chosen
        if variant == "we":
            tot = float(deg[chosen].sum())
            for t in chosen:
                pair_w[(t, i) if t < i else (i, t)] = deg[t] / tot

    if variant == "wsf":
        for i, chosen in attach.items():
            tot = float(deg[chosen].sum())
            for t in chosen:
                pair_w[(t, i) if t < i else (i, t)] = deg[t] / tot

    u = np.array([a for a, _ in order], dtype=np.int32)
    v = np.array([b for _, b in order], dtype=np.int32)
    w = np.array([pair_w[k] for k in order], dtype=np.float64)
    return build_graph((u, v, w), n)


def complete_graph_from_feature_matrix(features: np.ndarray) -> WeightedGraph:
    """All-pairs graph weighted by cosine similarity mapped to (0, 1].

    Raw cosines live in [-1, 1]; weights are (cos + 1) / 2 so walk kernels see
    positive mass (Pearson correlation is invariant under the affine map).
    Rows must be nonzero and no two rows exactly antiparallel.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DegenerateParams(f"feature matrix must be 2-D with >= 2 rows, got shape {x.shape}")
    norms = np.linalg.norm(x, axis=1)
    if (norms == 0).any():
        raise DegenerateParams("feature matrix has a zero row; cosine undefined")
    xn = x / norms[:, None]
    cos = xn @ xn.T
    iu, iv = np.triu_indices(x.shape[0], k=1)
    w = np.minimum((cos[iu, iv] + 1.0) / 2.0, 1.0)
    return build_graph((iu.astype(np.int32), iv.astype(np.int32), w), x.shape[0])


def gen_complete_from_features(n: int, f: int, seed: int = 0) -> tuple[WeightedGraph, np.ndarray]:
    """Standard-normal N x f feature matrix plus its complete similarity graph."""
    if n < 2 or f < 1:
        raise DegenerateParams(f"need n >= 2 and f >= 1, got n={n}, f={f}")
    features = np.random.default_rng(seed).standard_normal((n, f))
    return complete_graph_from_feature_matrix(features), features


MODEL_NAMES = ("er", "sbm", "waxman", "ba-wsf", "ba-we", "complete")


def build_model_graph(
    model: str,
    n: int,
    avg_degree: float = 16.0,
    seed: int = 0,
    weights: str = "uniform",
    ratio: float = 0.2,
    beta: float = 0.3,
    features: int = 16,
    sbm_weight_mode: str = "jitter",
) -> WeightedGraph:
    """Dispatch a model name to its generator with sweep-friendly parameters.

    BA maps the average-degree knob to m = round(avg_degree / 2); "complete"
    ignores avg_degree and uses the feature count.
    """
    model = model.lower()
    if model == "er":
        return gen_er(n, avg_degree, weights, seed)
    if model == "sbm":
        return gen_sbm(n, avg_degree, ratio, seed, weight_mode=sbm_weight_mode)
    if model in ("waxman", "wax"):
        return gen_waxman(n, avg_degree, seed, beta)
    if model in ("ba-wsf", "ba-we"):
        return gen_ba(n, max(1, round(avg_degree / 2)), model.split("-")[1], seed)
    if model == "complete":
        return gen_complete_from_features(n, features, seed)[0]
    raise DegenerateParams(f"unknown model {model!r}; expected one of {MODEL_NAMES}")
