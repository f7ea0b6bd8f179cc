"""Skip-gram training with negative sampling over walk corpora (CBOW optional).

The reference operations (pair loss, noise table) are plain numpy; the
training loop itself is a numba kernel over the dense walk matrix. Input-side
vectors are the canonical node embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numba import njit, prange

from .errors import DegenerateParams, NonFiniteUpdate
from .seeding import derive_seed
from .walks import WalkCorpus

__all__ = [
    "TrainConfig",
    "EmbeddingMatrix",
    "NoiseTable",
    "init_embeddings",
    "build_noise_table",
    "sgns_pair_loss",
    "train",
]


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 64
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    final_lr: float = 1e-4
    architecture: str = "skipgram"
    subsample: float = 0.0
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise DegenerateParams(f"dim must be >= 2, got {self.dim}")
        if self.window < 1:
            raise DegenerateParams(f"window must be >= 1, got {self.window}")
        if self.negatives < 1:
            raise DegenerateParams(f"negatives must be >= 1, got {self.negatives}")
        if self.epochs < 1:
            raise DegenerateParams(f"epochs must be >= 1, got {self.epochs}")
        if self.initial_lr <= 0 or self.final_lr <= 0:
            raise DegenerateParams("learning rates must be positive")
        if self.architecture not in ("skipgram", "cbow"):
            raise DegenerateParams(
                f"architecture must be 'skipgram' or 'cbow', got {self.architecture!r}"
            )
        if self.workers < 1:
            raise DegenerateParams(f"workers must be >= 1, got {self.workers}")


@dataclass
class EmbeddingMatrix:
    """Input and output vectors; rows of ``input_vectors`` are the node embeddings."""

    input_vectors: np.ndarray
    output_vectors: np.ndarray
    corpus_fingerprint: str | None
    config: TrainConfig
    epoch_mean_loss: list[float] | None = None

    def export_csv(self, path: str | Path) -> None:
        dim = self.input_vectors.shape[1]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("node_id," + ",".join(f"dim_{d}" for d in range(dim)) + "\n")
            for i, row in enumerate(self.input_vectors):
                fh.write(str(i) + "," + ",".join(repr(float(x)) for x in row) + "\n")


def init_embeddings(n: int, cfg: TrainConfig) -> EmbeddingMatrix:
    """Input entries uniform in [-0.5/dim, 0.5/dim]; output vectors zero."""
    if n < 1:
        raise DegenerateParams(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(cfg.seed)
    inp = ((rng.random((n, cfg.dim)) - 0.5) / cfg.dim).astype(np.float32)
    out = np.zeros((n, cfg.dim), dtype=np.float32)
    return EmbeddingMatrix(inp, out, None, cfg)


@dataclass(frozen=True)
class NoiseTable:
    """Unigram^0.75 negative-sampling distribution over node ids."""

    probabilities: np.ndarray
    cumulative: np.ndarray

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.searchsorted(self.cumulative, rng.random(size), side="right")


def _token_counts(corpus: WalkCorpus) -> np.ndarray:
    valid = np.arange(corpus.walks.shape[1]) < corpus.lengths[:, None]
    return np.bincount(corpus.walks[valid], minlength=corpus.n_nodes)


def build_noise_table(corpus: WalkCorpus) -> NoiseTable:
    """Node frequencies raised to the 3/4 power, normalized; absent nodes get 0."""
    if corpus.n_sequences == 0:
        raise DegenerateParams("corpus is empty")
    counts = _token_counts(corpus).astype(np.float64)
    probs = counts**0.75
    probs /= probs.sum()
    cum = np.cumsum(probs)
    cum /= cum[-1]
    cum[-1] = 1.0
    return NoiseTable(probabilities=probs, cumulative=cum)


def _unigram_lookup(cumulative: np.ndarray, min_size: int = 1 << 20) -> np.ndarray:
    """Dense draw table for O(1) negative sampling inside the kernel.

    Entry j holds the node owning quantile (j + 0.5) / size; the size is a
    power of two so the kernel can mask instead of dividing. Zero-probability
    nodes never appear in the table.
    """
    size = min_size
    while size < 64 * cumulative.shape[0]:
        size <<= 1
    grid = (np.arange(size, dtype=np.float64) + 0.5) / size
    return np.searchsorted(cumulative, grid, side="right").astype(np.int32)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sgns_pair_loss(
    center: np.ndarray, context: np.ndarray, negatives: Sequence[np.ndarray] | np.ndarray
):
    """Negative-sampling loss for one (center, context) pair plus noise vectors.

    loss = -log sigma(c.ctx) - sum_neg log sigma(-c.neg). Returns the loss and
    the gradients (d_center, d_context, d_negatives) for plain SGD.
    """
    c = np.asarray(center, dtype=np.float64)
    ctx = np.asarray(context, dtype=np.float64)
    negs = np.asarray(negatives, dtype=np.float64).reshape(-1, c.shape[0])

    x_pos = float(c @ ctx)
    loss = float(np.logaddexp(0.0, -x_pos))
    g_pos = float(_sigmoid(np.array([x_pos]))[0]) - 1.0  # dloss/dx_pos
    g_center = g_pos * ctx
    g_context = g_pos * c

    g_negatives = np.zeros_like(negs)
    if negs.shape[0]:
        x_neg = negs @ c
        loss += float(np.logaddexp(0.0, x_neg).sum())
        g_neg = _sigmoid(x_neg)  # dloss/dx_neg
        g_center = g_center + g_neg @ negs
        g_negatives = g_neg[:, None] * c
    return loss, (g_center, g_context, g_negatives)


# ---------------------------------------------------------------------------
# numba training kernels
# ---------------------------------------------------------------------------

_MULT = np.uint64(6364136223846793005)
_INC = np.uint64(1442695040888963407)
_U53 = np.float64(1.0 / 9007199254740992.0)  # 2**-53


@njit(cache=True, nogil=True, inline="always")
def _lcg(state):  # pragma: no cover - numba
    return state * _MULT + _INC


@njit(cache=True, nogil=True, inline="always")
def _lcg_uniform(state):  # pragma: no cover - numba
    return np.float64(state >> np.uint64(11)) * _U53


@njit(cache=True, nogil=True, inline="always")
def _mix64(x):  # pragma: no cover - numba (splitmix64 finalizer)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


@njit(cache=True, nogil=True, inline="always")
def _softplus(x):  # pragma: no cover - numba
    if x > 0.0:
        return np.log1p(np.exp(-x))
    return -x + np.log1p(np.exp(x))


@njit(cache=True, nogil=True, fastmath=True)
def _sg_walk(scratch, kept, inp, out, noise_table, window, negatives, lr, state, work, track_loss):  # pragma: no cover - numba
    dim = inp.shape[1]
    mask = np.uint64(noise_table.shape[0] - 1)
    loss_sum = 0.0
    n_pairs = 0
    for pos in range(kept):
        center = scratch[pos]
        state = _lcg(state)
        b = 1 + np.int64((state >> np.uint64(33)) % np.uint64(window))
        lo = pos - b
        if lo < 0:
            lo = 0
        hi = pos + b + 1
        if hi > kept:
            hi = kept
        for cpos in range(lo, hi):
            if cpos == pos:
                continue
            ctx = scratch[cpos]
            for d in range(dim):
                work[d] = np.float32(0.0)
            for t in range(negatives + 1):
                if t == 0:
                    target = ctx
                    label = np.float32(1.0)
                else:
                    state = _lcg(state)
                    target = noise_table[np.int64((state >> np.uint64(11)) & mask)]
                    if target == ctx:
                        continue
                    label = np.float32(0.0)
                dot = np.float32(0.0)
                for d in range(dim):
                    dot += inp[center, d] * out[target, d]
                if dot >= 0.0:
                    sig = np.float32(1.0) / (np.float32(1.0) + np.exp(-dot))
                else:
                    ex = np.exp(dot)
                    sig = ex / (np.float32(1.0) + ex)
                if track_loss:
                    if t == 0:
                        loss_sum += _softplus(np.float64(dot))
                    else:
                        loss_sum += _softplus(-np.float64(dot))
                g = np.float32((label - sig) * lr)
                for d in range(dim):
                    work[d] += g * out[target, d]
                    out[target, d] += g * inp[center, d]
            for d in range(dim):
                inp[center, d] += work[d]
            n_pairs += 1
    return state, loss_sum, n_pairs


@njit(cache=True, nogil=True, fastmath=True)
def _cbow_walk(scratch, kept, inp, out, noise_table, window, negatives, lr, state, work, hvec, track_loss):  # pragma: no cover - numba
    dim = inp.shape[1]
    mask = np.uint64(noise_table.shape[0] - 1)
    loss_sum = 0.0
    n_pairs = 0
    for pos in range(kept):
        center = scratch[pos]
        state = _lcg(state)
        b = 1 + np.int64((state >> np.uint64(33)) % np.uint64(window))
        lo = pos - b
        if lo < 0:
            lo = 0
        hi = pos + b + 1
        if hi > kept:
            hi = kept
        cw = hi - lo - 1
        if cw <= 0:
            continue
        inv = np.float32(1.0 / cw)
        for d in range(dim):
            hvec[d] = np.float32(0.0)
            work[d] = np.float32(0.0)
        for cpos in range(lo, hi):
            if cpos == pos:
                continue
            tok = scratch[cpos]
            for d in range(dim):
                hvec[d] += inp[tok, d] * inv
        for t in range(negatives + 1):
            if t == 0:
                target = center
                label = np.float32(1.0)
            else:
                state = _lcg(state)
                target = noise_table[np.int64((state >> np.uint64(11)) & mask)]
                if target == center:
                    continue
                label = np.float32(0.0)
            dot = np.float32(0.0)
            for d in range(dim):
                dot += hvec[d] * out[target, d]
            if dot >= 0.0:
                sig = np.float32(1.0) / (np.float32(1.0) + np.exp(-dot))
            else:
                ex = np.exp(dot)
                sig = ex / (np.float32(1.0) + ex)
            if track_loss:
                if t == 0:
                    loss_sum += _softplus(np.float64(dot))
                else:
                    loss_sum += _softplus(-np.float64(dot))
            g = np.float32((label - sig) * lr)
            for d in range(dim):
                work[d] += g * out[target, d]
                out[target, d] += g * hvec[d]
        for cpos in range(lo, hi):
            if cpos == pos:
                continue
            tok = scratch[cpos]
            for d in range(dim):
                inp[tok, d] += work[d]
        n_pairs += 1
    return state, loss_sum, n_pairs


@njit(cache=True, nogil=True, fastmath=True)
def _filter_row(walks, lengths, j, scratch, freq_keep, state):  # pragma: no cover - numba
    ln = lengths[j]
    kept = 0
    if freq_keep.shape[0] == 0:
        for p in range(ln):
            scratch[kept] = walks[j, p]
            kept += 1
    else:
        for p in range(ln):
            tok = walks[j, p]
            state = _lcg(state)
            if _lcg_uniform(state) < freq_keep[tok]:
                scratch[kept] = tok
                kept += 1
    return kept, state


@njit(cache=True, nogil=True, fastmath=True)
def _epoch_serial(walks, lengths, inp, out, noise_table, window, negatives, lr0, lr_final,
                  tokens_done, total_tokens, state, freq_keep, cbow, track_loss):  # pragma: no cover - numba
    max_len = walks.shape[1]
    scratch = np.empty(max_len, dtype=np.int32)
    work = np.empty(inp.shape[1], dtype=np.float32)
    hvec = np.empty(inp.shape[1], dtype=np.float32)
    loss_sum = 0.0
    n_pairs = 0
    for j in range(walks.shape[0]):
        frac = tokens_done / total_tokens
        lr = lr0 + (lr_final - lr0) * frac
        kept, state = _filter_row(walks, lengths, j, scratch, freq_keep, state)
        if cbow:
            state, ls, npair = _cbow_walk(
                scratch, kept, inp, out, noise_table, window, negatives, lr, state, work, hvec, track_loss
            )
        else:
            state, ls, npair = _sg_walk(
                scratch, kept, inp, out, noise_table, window, negatives, lr, state, work, track_loss
            )
        loss_sum += ls
        n_pairs += npair
        tokens_done += lengths[j]
    return state, tokens_done, loss_sum, n_pairs


@njit(cache=True, nogil=True, fastmath=True, parallel=True)
def _epoch_parallel(walks, lengths, inp, out, noise_table, window, negatives, lr0, lr_final,
                    token_offsets, total_tokens, epoch_base, seed, freq_keep, cbow, track_loss):  # pragma: no cover - numba
    n_walks = walks.shape[0]
    max_len = walks.shape[1]
    losses = np.zeros(n_walks, dtype=np.float64)
    pairs = np.zeros(n_walks, dtype=np.int64)
    for j in prange(n_walks):
        scratch = np.empty(max_len, dtype=np.int32)
        work = np.empty(inp.shape[1], dtype=np.float32)
        hvec = np.empty(inp.shape[1], dtype=np.float32)
        state = _mix64(seed + np.uint64(epoch_base + j))
        lr = lr0 + (lr_final - lr0) * (token_offsets[j] / total_tokens)
        kept, state = _filter_row(walks, lengths, j, scratch, freq_keep, state)
        if cbow:
            state, ls, npair = _cbow_walk(
                scratch, kept, inp, out, noise_table, window, negatives, lr, state, work, hvec, track_loss
            )
        else:
            state, ls, npair = _sg_walk(
                scratch, kept, inp, out, noise_table, window, negatives, lr, state, work, track_loss
            )
        losses[j] = ls
        pairs[j] = npair
    return losses.sum(), pairs.sum()


def _keep_probabilities(counts: np.ndarray, subsample: float) -> np.ndarray:
    frac = counts / max(counts.sum(), 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        keep = (np.sqrt(frac / subsample) + 1.0) * (subsample / frac)
    keep[~np.isfinite(keep)] = 1.0
    return np.minimum(keep, 1.0)


def train(
    corpus: WalkCorpus,
    cfg: TrainConfig,
    initial: EmbeddingMatrix | None = None,
    on_epoch_end: Callable[[int, np.ndarray], None] | None = None,
    collect_loss: bool = False,
) -> EmbeddingMatrix:
    """Train embeddings over the corpus; deterministic when cfg.workers == 1.

    With workers > 1 the epoch is processed hogwild-style (lock-free
    concurrent updates), so results vary run to run. Raises NonFiniteUpdate
    if any matrix entry stops being finite.
    """
    if corpus.n_sequences == 0:
        raise DegenerateParams("corpus is empty")
    if int(corpus.walks.max()) >= corpus.n_nodes:
        raise DegenerateParams("corpus contains node ids outside the graph")

    emb = initial if initial is not None else init_embeddings(corpus.n_nodes, cfg)
    inp = np.ascontiguousarray(emb.input_vectors, dtype=np.float32).copy()
    out = np.ascontiguousarray(emb.output_vectors, dtype=np.float32).copy()
    if inp.shape != (corpus.n_nodes, cfg.dim):
        raise DegenerateParams(
            f"initial embeddings shaped {inp.shape}, expected {(corpus.n_nodes, cfg.dim)}"
        )
    if not (np.isfinite(inp).all() and np.isfinite(out).all()):
        raise NonFiniteUpdate("initial embeddings contain non-finite entries")

    counts = _token_counts(corpus)
    noise_table = _unigram_lookup(build_noise_table(corpus).cumulative)
    freq_keep = (
        _keep_probabilities(counts.astype(np.float64), cfg.subsample)
        if cfg.subsample > 0
        else np.empty(0, dtype=np.float64)
    )
    lengths64 = corpus.lengths.astype(np.int64)
    total_tokens = float(max(cfg.epochs * int(lengths64.sum()), 1))
    cbow = cfg.architecture == "cbow"
    track_loss = bool(collect_loss)

    state = np.uint64(derive_seed(cfg.seed, 0x5347))
    tokens_done = 0.0
    token_offsets = np.concatenate([[0], np.cumsum(lengths64)[:-1]]).astype(np.float64)
    losses: list[float] = []

    for epoch in range(cfg.epochs):
        if cfg.workers == 1:
            state, tokens_done, loss_sum, n_pairs = _epoch_serial(
                corpus.walks, corpus.lengths, inp, out, noise_table,
                cfg.window, cfg.negatives, cfg.initial_lr, cfg.final_lr,
                tokens_done, total_tokens, np.uint64(state), freq_keep, cbow, track_loss,
            )
        else:
            epoch_tokens = epoch * float(lengths64.sum())
            loss_sum, n_pairs = _epoch_parallel(
                corpus.walks, corpus.lengths, inp, out, noise_table,
                cfg.window, cfg.negatives, cfg.initial_lr, cfg.final_lr,
                token_offsets + epoch_tokens, total_tokens,
                epoch * corpus.n_sequences, np.uint64(derive_seed(cfg.seed, 0x504C)),
                freq_keep, cbow, track_loss,
            )
        if not (np.isfinite(inp).all() and np.isfinite(out).all()):
            bad = int((~np.isfinite(inp)).sum() + (~np.isfinite(out)).sum())
            raise NonFiniteUpdate(
                f"epoch {epoch}: {bad} non-finite entries (lr={cfg.initial_lr}, dim={cfg.dim})"
            )
        if track_loss:
            losses.append(loss_sum / max(n_pairs, 1))
        if on_epoch_end is not None:
            on_epoch_end(epoch, inp.copy())

    return EmbeddingMatrix(
        input_vectors=inp,
        output_vectors=out,
        corpus_fingerprint=corpus.graph_fingerprint,
        config=cfg,
        epoch_mean_loss=losses if track_loss else None,
    )
