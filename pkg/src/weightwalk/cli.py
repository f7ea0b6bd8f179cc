"""Command-line interface composing generators, walks, training and sweeps."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from .analysis import SWEEP_CSV_COLUMNS, run_single, run_sweep
from .config import load_experiment_config
from .datasets import dataset_names, fetch_dataset, load_dataset
from .edgelist import parse_edge_list, write_edge_list
from .errors import NetworkUnavailable, WeightWalkError
from .generators import MODEL_NAMES, build_model_graph, gen_complete_from_features
from .sgns import TrainConfig, train
from .walks import KERNELS, WalkConfig, build_corpus

TABLE2_COLUMNS = ("graph", "kernel", "weight_mode", "instance", "seed", "pearson_r", "n_pairs", "wall_ms")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="base random seed")
    p.add_argument(
        "--deterministic",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="single-worker, bit-reproducible mode (default on)",
    )


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=MODEL_NAMES, help="graph model to generate")
    p.add_argument("--nodes", type=int, default=1024)
    p.add_argument("--avg-degree", type=float, default=16.0)
    p.add_argument("--weights", choices=("uniform", "normal", "exponential"), default="uniform")
    p.add_argument("--ratio", type=float, default=0.2, help="SBM p_out/p_in")
    p.add_argument("--sbm-weight-mode", choices=("jitter", "exact"), default="jitter")
    p.add_argument("--beta", type=float, default=0.3, help="Waxman decay scale")
    p.add_argument("--features", type=int, default=16, help="feature dim for complete graphs")


def _add_walk_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", choices=KERNELS, default="wrw")
    p.add_argument("--walks-per-node", type=int, default=16)
    p.add_argument("--walk-length", type=int, default=128)


def _add_train_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--initial-lr", type=float, default=0.025)
    p.add_argument("--architecture", choices=("skipgram", "cbow"), default="skipgram")
    p.add_argument("--train-workers", type=int, default=1)


def _add_parse_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--duplicates", choices=("sum", "reject"), default="sum")
    p.add_argument("--directed-collapse", choices=("sum", "max", "mean"), default="sum")
    p.add_argument("--weight-column", default="weight")
    p.add_argument("--min-weight-epsilon", type=float, default=None,
                   help="clamp exact-zero weights to this value instead of rejecting")
    p.add_argument("--largest-component", action="store_true")


def _model_graph(args) -> object:
    return build_model_graph(
        args.model,
        n=args.nodes,
        avg_degree=args.avg_degree,
        seed=args.seed,
        weights=args.weights,
        ratio=args.ratio,
        beta=args.beta,
        features=args.features,
        sbm_weight_mode=args.sbm_weight_mode,
    )


def _load_graph(args):
    if getattr(args, "graph", None):
        return parse_edge_list(
            args.graph,
            duplicate_policy=args.duplicates,
            directed_collapse=args.directed_collapse,
            weight_column=args.weight_column,
            zero_weight_epsilon=args.min_weight_epsilon,
            largest_component=args.largest_component,
        ), f"path:{args.graph}"
    if not args.model:
        raise WeightWalkError("pass either --graph or --model")
    return _model_graph(args), args.model


def cmd_generate(args) -> int:
    if args.model == "complete" and args.features_out:
        g, feats = gen_complete_from_features(args.nodes, args.features, args.seed)
        with open(args.features_out, "w", encoding="utf-8") as fh:
            fh.write(",".join(f"f_{i}" for i in range(feats.shape[1])) + "\n")
            for row in feats:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
    else:
        g = _model_graph(args)
    write_edge_list(g, args.out)
    print(f"wrote {g.node_count} nodes, {g.edge_count} edges to {args.out}")
    return 0


def cmd_walk(args) -> int:
    g, _ = _load_graph(args)
    cfg = WalkConfig(args.kernel, args.walks_per_node, args.walk_length, args.seed)
    corpus = build_corpus(g, cfg)
    corpus.write_text(args.out)
    print(f"wrote {corpus.n_sequences} walks ({corpus.n_tokens} tokens) to {args.out}")
    return 0


def cmd_run(args) -> int:
    g, label = _load_graph(args)
    wcfg = WalkConfig(args.kernel, args.walks_per_node, args.walk_length)
    tcfg = TrainConfig(
        dim=args.dim, window=args.window, negatives=args.negatives, epochs=args.epochs,
        initial_lr=args.initial_lr, architecture=args.architecture, workers=args.train_workers,
    )
    res = run_single(
        g, args.kernel, wcfg, tcfg,
        weight_mode=args.weight_mode, seed=args.seed, null_target=args.null_target,
        model_label=label, collect_pairs=args.pairs_out is not None,
        deterministic=args.deterministic,
    )
    if args.pairs_out:
        with open(args.pairs_out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(("u", "v", "weight", "cosine"))
            for u, v, wt, cos in zip(*res.pairs):
                w.writerow((int(u), int(v), repr(float(wt)), repr(float(cos))))
    print(json.dumps({
        "pearson_r": res.pearson_r,
        "spearman_r": res.spearman_r,
        "n_pairs": res.n_pairs,
        "metadata": res.metadata,
    }, indent=2))
    return 0


def cmd_sweep(args) -> int:
    spec, cfg_out = load_experiment_config(args.config)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.deterministic is not None:
        spec = replace(spec, deterministic=args.deterministic)
    out = args.out or cfg_out
    if not out:
        raise WeightWalkError("no output path: pass --out or set \"output\" in the config")
    result = run_sweep(spec, out_path=out, workers=args.workers)
    n_err = sum(1 for r in result.rows if r.error)
    print(f"wrote {len(result.rows)} rows to {out}" + (f" ({n_err} cell errors)" if n_err else ""))
    return 0


def cmd_table2(args) -> int:
    names = args.networks.split(",") if args.networks else list(dataset_names())
    wcfg = WalkConfig(walks_per_node=args.walks_per_node, walk_length=args.walk_length)
    tcfg = TrainConfig(
        dim=args.dim, window=args.window, negatives=args.negatives, epochs=args.epochs,
        initial_lr=args.initial_lr, architecture=args.architecture, workers=args.train_workers,
    )
    rows, skipped = [], []
    for name in names:
        try:
            g = load_dataset(name.strip(), args.cache, offline=args.offline)
        except NetworkUnavailable as exc:
            skipped.append(name)
            print(f"skipping {name}: {exc}", file=sys.stderr)
            continue
        for kernel in KERNELS:
            for wmode in ("shuffled", "original"):
                for inst in range(args.instances):
                    res = run_single(
                        g, kernel, wcfg, tcfg, weight_mode=wmode,
                        seed=args.seed + inst, null_target=args.null_target,
                        model_label=name, deterministic=args.deterministic,
                    )
                    rows.append((
                        name, kernel, wmode, inst, args.seed + inst,
                        "" if res.pearson_r is None else repr(res.pearson_r),
                        res.n_pairs, res.metadata["wall_ms"],
                    ))
    if not rows:
        raise NetworkUnavailable(
            f"no study networks available under {args.cache}; run `weightwalk fetch` first"
        )
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TABLE2_COLUMNS)
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}" + (f"; skipped: {', '.join(skipped)}" if skipped else ""))
    return 0


def cmd_fetch(args) -> int:
    names = [args.name] if args.name else list(dataset_names())
    for name in names:
        path = fetch_dataset(name, args.cache, offline=args.offline)
        print(f"{name}: {path}")
    return 0


def cmd_plot(args) -> int:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - optional extra
        raise WeightWalkError("plotting needs matplotlib (pip install weightwalk[plot])") from exc

    series: dict[tuple, dict[float, list[float]]] = {}
    with open(args.input, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            if not rec["pearson_r"]:
                continue
            key = (rec["kernel"], rec["weight_mode"])
            series.setdefault(key, {}).setdefault(float(rec["cell_value"]), []).append(
                float(rec["pearson_r"])
            )
    fig, ax = plt.subplots(figsize=(6, 4))
    for (kernel, wmode), cells in sorted(series.items()):
        xs = sorted(cells)
        ys = [sum(cells[x]) / len(cells[x]) for x in xs]
        ax.plot(xs, ys, marker="o", label=f"{kernel}/{wmode}")
    ax.set_xlabel(args.xlabel)
    ax.set_ylabel("pearson r")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weightwalk",
        description="Weight-aware random walks, node embeddings, and edge-weight recovery experiments",
    )
    parser.add_argument("--version", action="version", version=f"weightwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a weighted model graph as a TSV edge list")
    _add_model_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--features-out", help="also write the feature matrix (complete model)")
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("walk", help="dump a walk corpus, one walk per line")
    p.add_argument("--graph", help="edge-list file to walk on")
    _add_model_args(p)
    _add_walk_args(p)
    _add_parse_args(p)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("run", help="single graph -> walk -> train -> correlation run")
    p.add_argument("--graph", help="edge-list file (otherwise use --model)")
    _add_model_args(p)
    _add_walk_args(p)
    _add_train_args(p)
    _add_parse_args(p)
    p.add_argument("--weight-mode", choices=("original", "shuffled"), default="original")
    p.add_argument("--null-target", choices=("seen", "original"), default="seen")
    p.add_argument("--pairs-out", help="write per-edge (weight, cosine) pairs CSV")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a sweep described by a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="result CSV (defaults to the config's output field)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table2", help="real-network correlation table (original vs shuffled)")
    p.add_argument("--cache", default="data")
    p.add_argument("--out", required=True)
    p.add_argument("--networks", help="comma-separated subset of study networks")
    p.add_argument("--instances", type=int, default=1)
    p.add_argument("--null-target", choices=("seen", "original"), default="seen")
    p.add_argument("--offline", action="store_true", help="use the cache only, never download")
    _add_walk_args(p)
    _add_train_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("fetch", help="download study networks into the cache")
    p.add_argument("--name", help="one study network (default: all 11)")
    p.add_argument("--cache", default="data")
    p.add_argument("--offline", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("plot", help="line chart of mean pearson r from a sweep CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--xlabel", default="cell value")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WeightWalkError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
