"""Edge-weight recovery experiments: correlations, sweeps, nulls, thresholds.

A single run is generate/load -> (optionally shuffle weights) -> walk ->
train -> correlate embedding cosines against edge weights. Sweeps repeat
that over a grid of one varied parameter, several kernels and weight modes,
and multiple instance seeds, streaming rows to CSV so long sweeps are
resumable.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import DegenerateParams, DegenerateVariance, EmptyGraph, WeightWalkError, ZeroVector
from .generators import MODEL_NAMES, build_model_graph, gen_complete_from_features
from .graph import WeightedGraph, component_stats, shuffle_weights, threshold_by_percentile
from .seeding import derive_seed
from .sgns import EmbeddingMatrix, TrainConfig, train
from .walks import KERNELS, WalkConfig, build_corpus

__all__ = [
    "pearson",
    "spearman",
    "edge_cosine_similarities",
    "pair_cosines",
    "CorrelationResult",
    "run_single",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "run_sweep",
    "run_threshold_sweep",
    "SWEEP_CSV_COLUMNS",
    "VARIED_PARAMS",
]

SWEEP_CSV_COLUMNS = (
    "model",
    "varied",
    "cell_value",
    "kernel",
    "weight_mode",
    "instance",
    "seed",
    "pearson_r",
    "n_pairs",
    "wall_ms",
    "spearman_r",
    "error",
)

VARIED_PARAMS = ("graph_size", "avg_degree", "walks_per_node", "walk_length", "features", "threshold")


def pearson(x, y) -> float:
    """Sample Pearson correlation; raises DegenerateVariance on constant input."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"inputs must be equal-length 1-D, got {x.shape} and {y.shape}")
    if x.shape[0] < 3:
        raise ValueError(f"need at least 3 pairs, got {x.shape[0]}")
    xm = x - x.mean()
    ym = y - y.mean()
    sx = float(np.sqrt(xm @ xm))
    sy = float(np.sqrt(ym @ ym))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateVariance("one of the sequences is constant")
    return float(np.clip((xm @ ym) / (sx * sy), -1.0, 1.0))


def _average_ranks(a: np.ndarray) -> np.ndarray:
    order = np.argsort(a, kind="stable")
    sa = a[order]
    new_group = np.concatenate([[True], sa[1:] != sa[:-1]])
    gid = np.cumsum(new_group) - 1
    counts = np.bincount(gid)
    ends = np.cumsum(counts)
    avg = ends - (counts - 1) / 2.0
    ranks = np.empty(a.shape[0], dtype=np.float64)
    ranks[order] = avg[gid]
    return ranks


def spearman(x, y) -> float:
    """Rank correlation (diagnostic column only; the study metric is Pearson)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return pearson(_average_ranks(x), _average_ranks(y))


def pair_cosines(emb: EmbeddingMatrix, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Cosine similarity of input-vector rows u and v, chunked to bound memory."""
    x = emb.input_vectors
    norms = np.linalg.norm(x.astype(np.float64), axis=1)
    used = np.union1d(u, v) if u.shape[0] else np.empty(0, dtype=np.int64)
    zero = used[norms[used] == 0.0] if used.shape[0] else used
    if zero.shape[0]:
        raise ZeroVector(f"zero-norm embedding for node(s) {zero[:5].tolist()}")
    out = np.empty(u.shape[0], dtype=np.float64)
    step = 1 << 16
    for lo in range(0, u.shape[0], step):
        hi = min(lo + step, u.shape[0])
        xu = x[u[lo:hi]].astype(np.float64)
        xv = x[v[lo:hi]].astype(np.float64)
        out[lo:hi] = np.einsum("ij,ij->i", xu, xv) / (norms[u[lo:hi]] * norms[v[lo:hi]])
    return out


class EdgeSimilarities(NamedTuple):
    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray
    cosine: np.ndarray


def edge_cosine_similarities(g: WeightedGraph, emb: EmbeddingMatrix) -> EdgeSimilarities:
    """One (u, v, weight, cosine) record per edge, in edge order."""
    if emb.input_vectors.shape[0] < g.node_count:
        raise DegenerateParams(
            f"embedding covers {emb.input_vectors.shape[0]} nodes, graph has {g.node_count}"
        )
    cos = pair_cosines(emb, g.edges_u, g.edges_v)
    return EdgeSimilarities(g.edges_u, g.edges_v, g.edges_w, cos)


@dataclass
class CorrelationResult:
    """Outcome of one pipeline run; r is None when the correlation is undefined."""

    pearson_r: float | None
    spearman_r: float | None
    n_pairs: int
    metadata: dict
    pairs: EdgeSimilarities | None = None


def _safe_corr(x, y) -> tuple[float | None, float | None]:
    try:
        r = pearson(x, y)
    except DegenerateVariance:
        return None, None
    try:
        rho = spearman(x, y)
    except DegenerateVariance:
        rho = None
    return r, rho


def run_single(
    g: WeightedGraph,
    kernel: str,
    walk_cfg: WalkConfig = WalkConfig(),
    train_cfg: TrainConfig = TrainConfig(),
    weight_mode: str = "original",
    seed: int = 0,
    null_target: str = "seen",
    model_label: str = "",
    collect_pairs: bool = False,
    deterministic: bool = True,
) -> CorrelationResult:
    """Full pipeline on one graph.

    In shuffled mode the walk runs on a weight-permuted copy; the correlation
    target is the shuffled weights the walk saw (null_target="seen") or the
    original assignment (null_target="original").
    """
    if weight_mode not in ("original", "shuffled"):
        raise DegenerateParams(f"weight_mode must be 'original' or 'shuffled', got {weight_mode!r}")
    if null_target not in ("seen", "original"):
        raise DegenerateParams(f"null_target must be 'seen' or 'original', got {null_target!r}")
    t0 = time.perf_counter()

    g_seen = shuffle_weights(g, derive_seed(seed, 3)) if weight_mode == "shuffled" else g
    wcfg = replace(walk_cfg, kernel=kernel, seed=derive_seed(seed, 1))
    tcfg = replace(
        train_cfg, seed=derive_seed(seed, 2), workers=1 if deterministic else train_cfg.workers
    )
    corpus = build_corpus(g_seen, wcfg)
    emb = train(corpus, tcfg)
    sims = edge_cosine_similarities(g_seen, emb)
    target_w = g.edges_w if (weight_mode == "shuffled" and null_target == "original") else sims.weight
    r, rho = _safe_corr(target_w, sims.cosine)

    meta = {
        "model": model_label,
        "kernel": wcfg.kernel,
        "weight_mode": weight_mode,
        "null_target": null_target,
        "seed": seed,
        "walk_config": asdict(wcfg),
        "train_config": asdict(tcfg),
        "wall_ms": int((time.perf_counter() - t0) * 1000),
        **component_stats(g_seen),
    }
    pairs = EdgeSimilarities(sims.u, sims.v, target_w, sims.cosine) if collect_pairs else None
    return CorrelationResult(r, rho, sims.u.shape[0], meta, pairs)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """Grid over exactly one varied parameter, with fixed companions."""

    model: str
    varied: str
    grid: tuple
    fixed: dict = field(default_factory=dict)
    instances: int = 10
    kernels: tuple[str, ...] = KERNELS
    weight_mode: str = "original"
    null_target: str = "seen"
    walk: WalkConfig = WalkConfig()
    train: TrainConfig = TrainConfig()
    seed: int = 0
    deterministic: bool = True

    def __post_init__(self):
        if self.varied not in VARIED_PARAMS:
            raise DegenerateParams(f"varied must be one of {VARIED_PARAMS}, got {self.varied!r}")
        if not self.grid:
            raise DegenerateParams("grid must be non-empty")
        if self.instances < 1:
            raise DegenerateParams(f"instances must be >= 1, got {self.instances}")
        bad = [k for k in self.kernels if k not in KERNELS]
        if bad or not self.kernels:
            raise DegenerateParams(f"kernels must be a non-empty subset of {KERNELS}, got {self.kernels}")
        if self.weight_mode not in ("original", "shuffled", "both"):
            raise DegenerateParams(f"weight_mode must be original/shuffled/both, got {self.weight_mode!r}")
        known = self.model.lower() in MODEL_NAMES or self.model.startswith(("dataset:", "path:"))
        if not known:
            raise DegenerateParams(
                f"model must be one of {MODEL_NAMES} or 'dataset:<name>'/'path:<file>', got {self.model!r}"
            )
        object.__setattr__(self, "grid", tuple(self.grid))
        object.__setattr__(self, "kernels", tuple(k.lower() for k in self.kernels))

    @property
    def weight_modes(self) -> tuple[str, ...]:
        return ("original", "shuffled") if self.weight_mode == "both" else (self.weight_mode,)


@dataclass
class SweepRow:
    model: str
    varied: str
    cell_value: object
    kernel: str
    weight_mode: str
    instance: int
    seed: int
    pearson_r: float | None
    n_pairs: int
    wall_ms: int
    spearman_r: float | None = None
    error: str = ""

    def as_csv(self) -> list[str]:
        def fmt(x):
            return "" if x is None else repr(x) if isinstance(x, float) else str(x)

        return [fmt(getattr(self, c)) for c in SWEEP_CSV_COLUMNS]

    def key(self) -> tuple:
        return (str(self.cell_value), self.kernel, self.weight_mode, str(self.instance))


@dataclass
class AggregateCell:
    cell_value: object
    kernel: str
    weight_mode: str
    mean_r: float | None
    std_r: float | None
    n_defined: int
    n_total: int


@dataclass
class SweepResult:
    rows: list[SweepRow]
    aggregate: list[AggregateCell] = field(default_factory=list)

    @classmethod
    def from_rows(cls, rows: list[SweepRow]) -> "SweepResult":
        groups: dict[tuple, list[SweepRow]] = {}
        for row in rows:
            groups.setdefault((str(row.cell_value), row.kernel, row.weight_mode), []).append(row)
        agg = []
        for (_, kernel, wmode), grp in groups.items():
            rs = np.array([r.pearson_r for r in grp if r.pearson_r is not None])
            agg.append(
                AggregateCell(
                    cell_value=grp[0].cell_value,
                    kernel=kernel,
                    weight_mode=wmode,
                    mean_r=float(rs.mean()) if rs.shape[0] else None,
                    std_r=float(rs.std(ddof=1)) if rs.shape[0] > 1 else None,
                    n_defined=int(rs.shape[0]),
                    n_total=len(grp),
                )
            )
        return cls(rows=rows, aggregate=agg)

    def median_r(self, cell_value=None, kernel=None, weight_mode=None) -> float:
        sel = [
            r.pearson_r
            for r in self.rows
            if r.pearson_r is not None
            and (cell_value is None or str(r.cell_value) == str(cell_value))
            and (kernel is None or r.kernel == kernel)
            and (weight_mode is None or r.weight_mode == weight_mode)
        ]
        if not sel:
            raise DegenerateVariance("no defined correlation rows match the selection")
        return float(np.median(sel))


def _resolve_graph_params(spec: SweepSpec, value) -> dict:
    params = {
        "n": int(spec.fixed.get("nodes", 1024)),
        "avg_degree": float(spec.fixed.get("avg_degree", 16)),
        "weights": spec.fixed.get("weights", "uniform"),
        "ratio": float(spec.fixed.get("ratio", 0.2)),
        "beta": float(spec.fixed.get("beta", 0.3)),
        "features": int(spec.fixed.get("features", 16)),
        "sbm_weight_mode": spec.fixed.get("sbm_weight_mode", "jitter"),
    }
    if spec.varied == "graph_size":
        params["n"] = int(value)
    elif spec.varied == "avg_degree":
        params["avg_degree"] = float(value)
    elif spec.varied == "features":
        params["features"] = int(value)
    return params


def _resolve_walk_cfg(spec: SweepSpec, value) -> WalkConfig:
    wcfg = spec.walk
    if "walks_per_node" in spec.fixed:
        wcfg = replace(wcfg, walks_per_node=int(spec.fixed["walks_per_node"]))
    if "walk_length" in spec.fixed:
        wcfg = replace(wcfg, walk_length=int(spec.fixed["walk_length"]))
    if spec.varied == "walks_per_node":
        wcfg = replace(wcfg, walks_per_node=int(value))
    elif spec.varied == "walk_length":
        wcfg = replace(wcfg, walk_length=int(value))
    return wcfg


def _build_cell_graph(spec: SweepSpec, params: dict, graph_seed: int) -> WeightedGraph:
    if spec.model.startswith("dataset:"):
        from .datasets import load_dataset

        return load_dataset(spec.model.split(":", 1)[1], spec.fixed.get("cache_dir", "data"))
    if spec.model.startswith("path:"):
        from .edgelist import parse_edge_list

        return parse_edge_list(spec.model.split(":", 1)[1])
    return build_model_graph(spec.model, seed=graph_seed, **params)


def _load_rows_csv(path: Path) -> list[SweepRow]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                SweepRow(
                    model=rec["model"],
                    varied=rec["varied"],
                    cell_value=rec["cell_value"],
                    kernel=rec["kernel"],
                    weight_mode=rec["weight_mode"],
                    instance=int(rec["instance"]),
                    seed=int(rec["seed"]),
                    pearson_r=float(rec["pearson_r"]) if rec["pearson_r"] else None,
                    n_pairs=int(rec["n_pairs"]),
                    wall_ms=int(rec["wall_ms"]),
                    spearman_r=float(rec["spearman_r"]) if rec.get("spearman_r") else None,
                    error=rec.get("error", ""),
                )
            )
    return rows


def _stream_rows(
    row_iter: Iterable[SweepRow], out_path: str | Path | None, resumed: list[SweepRow]
) -> list[SweepRow]:
    """Write rows to <out>.partial as they arrive, atomically renaming at the end."""
    if out_path is None:
        return list(row_iter)
    out_path = Path(out_path)
    partial = Path(str(out_path) + ".partial")
    fresh = not partial.exists()
    rows = list(resumed)
    with open(partial, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(SWEEP_CSV_COLUMNS)
        for row in row_iter:
            writer.writerow(row.as_csv())
            fh.flush()
            rows.append(row)
    os.replace(partial, out_path)
    return rows


def run_sweep(
    spec: SweepSpec, out_path: str | Path | None = None, workers: int | None = None
) -> SweepResult:
    """Full factorial over grid x kernels x weight modes x instances.

    Cells run in a thread pool (the walk and training kernels release the
    GIL); rows are flushed in deterministic cell order. If <out>.partial
    exists from an interrupted sweep, finished cells are skipped.
    """
    if spec.varied == "threshold":
        return run_threshold_sweep(
            n=int(spec.fixed.get("nodes", 256)),
            f=int(spec.fixed.get("features", 16)),
            walk_cfg=_resolve_walk_cfg(spec, None),
            train_cfg=spec.train,
            grid=spec.grid,
            seed=spec.seed,
            instances=spec.instances,
            out_path=out_path,
        )

    done: dict[tuple, SweepRow] = {}
    if out_path is not None:
        partial = Path(str(out_path) + ".partial")
        if partial.exists():
            for row in _load_rows_csv(partial):
                done[row.key()] = row

    cells = [
        (vi, value, kernel, wmode, inst)
        for vi, value in enumerate(spec.grid)
        for kernel in spec.kernels
        for wmode in spec.weight_modes
        for inst in range(spec.instances)
    ]
    pending = [
        c for c in cells if (str(c[1]), c[2], c[3], str(c[4])) not in done
    ]

    graphs: dict[tuple, WeightedGraph] = {}
    for vi, value, _, _, inst in pending:
        params = _resolve_graph_params(spec, value)
        key = (tuple(sorted(params.items())), inst)
        if key not in graphs:
            graphs[key] = _build_cell_graph(spec, params, derive_seed(spec.seed, 11, inst))

    def run_cell(cell) -> SweepRow:
        vi, value, kernel, wmode, inst = cell
        run_seed = derive_seed(spec.seed, 13, vi, KERNELS.index(kernel), spec.weight_modes.index(wmode), inst)
        params = _resolve_graph_params(spec, value)
        g = graphs[(tuple(sorted(params.items())), inst)]
        t0 = time.perf_counter()
        try:
            res = run_single(
                g,
                kernel,
                _resolve_walk_cfg(spec, value),
                spec.train,
                weight_mode=wmode,
                seed=run_seed,
                null_target=spec.null_target,
                model_label=spec.model,
                deterministic=spec.deterministic,
            )
            return SweepRow(
                spec.model, spec.varied, value, kernel, wmode, inst, run_seed,
                res.pearson_r, res.n_pairs, res.metadata["wall_ms"], res.spearman_r,
            )
        except WeightWalkError as exc:
            return SweepRow(
                spec.model, spec.varied, value, kernel, wmode, inst, run_seed,
                None, 0, int((time.perf_counter() - t0) * 1000), None,
                error=f"{type(exc).__name__}: {exc}",
            )

    n_workers = workers or max(1, min(4, os.cpu_count() or 1))
    if n_workers == 1 or len(pending) <= 1:
        row_iter = map(run_cell, pending)
        rows = _stream_rows(row_iter, out_path, list(done.values()))
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as ex:
            rows = _stream_rows(ex.map(run_cell, pending), out_path, list(done.values()))

    if out_path is not None:
        meta = {
            "spec": {
                "model": spec.model, "varied": spec.varied, "grid": list(spec.grid),
                "fixed": spec.fixed, "instances": spec.instances, "kernels": list(spec.kernels),
                "weight_mode": spec.weight_mode, "null_target": spec.null_target,
                "walk": asdict(spec.walk), "train": asdict(spec.train),
                "seed": spec.seed, "deterministic": spec.deterministic,
            }
        }
        Path(str(out_path) + ".meta.json").write_text(json.dumps(meta, indent=2))
    return SweepResult.from_rows(rows)


def run_threshold_sweep(
    n: int,
    f: int,
    walk_cfg: WalkConfig,
    train_cfg: TrainConfig,
    grid: tuple,
    seed: int = 0,
    instances: int = 1,
    out_path: str | Path | None = None,
) -> SweepResult:
    """Prune a complete feature graph at each quantile and correlate against
    the original pre-threshold weights.

    The canonical rows (weight_mode "original") evaluate over every original
    pair whose endpoints both keep degree >= 1 after pruning; companion rows
    (weight_mode "surviving") restrict to the surviving edges only.
    """
    if n < 16:
        raise DegenerateParams(f"threshold sweep needs n >= 16, got {n}")
    done: dict[tuple, SweepRow] = {}
    if out_path is not None:
        partial = Path(str(out_path) + ".partial")
        if partial.exists():
            for row in _load_rows_csv(partial):
                done[row.key()] = row

    def cells():
        for inst in range(instances):
            g, _ = gen_complete_from_features(n, f, derive_seed(seed, 11, inst))
            for qi, q in enumerate(grid):
                if (str(q), walk_cfg.kernel, "original", str(inst)) in done:
                    continue
                run_seed = derive_seed(seed, 13, qi, inst)
                t0 = time.perf_counter()
                try:
                    gp = threshold_by_percentile(g, float(q))
                    wcfg = replace(walk_cfg, seed=derive_seed(run_seed, 1))
                    tcfg = replace(train_cfg, seed=derive_seed(run_seed, 2))
                    emb = train(build_corpus(gp, wcfg), tcfg)
                    deg = gp.degrees
                    mask = (deg[g.edges_u] > 0) & (deg[g.edges_v] > 0)
                    cos_all = pair_cosines(emb, g.edges_u[mask], g.edges_v[mask])
                    r_all, rho_all = _safe_corr(g.edges_w[mask], cos_all)
                    wall = int((time.perf_counter() - t0) * 1000)
                    yield SweepRow(
                        "complete", "threshold", q, wcfg.kernel, "original", inst, run_seed,
                        r_all, int(mask.sum()), wall, rho_all,
                    )
                    cos_surv = pair_cosines(emb, gp.edges_u, gp.edges_v)
                    r_surv, rho_surv = _safe_corr(gp.edges_w, cos_surv)
                    yield SweepRow(
                        "complete", "threshold", q, wcfg.kernel, "surviving", inst, run_seed,
                        r_surv, gp.edge_count, wall, rho_surv,
                    )
                except (EmptyGraph, WeightWalkError) as exc:
                    yield SweepRow(
                        "complete", "threshold", q, walk_cfg.kernel, "original", inst, run_seed,
                        None, 0, int((time.perf_counter() - t0) * 1000), None,
                        error=f"{type(exc).__name__}: {exc}",
                    )

    rows = _stream_rows(cells(), out_path, list(done.values()))
    return SweepResult.from_rows(rows)
