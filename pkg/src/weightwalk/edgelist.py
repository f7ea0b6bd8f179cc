"""Edge-list file parsing and writing.

Accepts tab-, comma- or whitespace-separated rows of source/target/weight,
with optional header and '#' comment lines. Labels are interned to dense
integer ids in first-appearance order.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError, RejectedEdge
from .graph import WeightedGraph, build_graph, connected_components

__all__ = ["parse_edge_list", "write_edge_list"]


def _split(line: str, delim: str | None) -> list[str]:
    if delim is None:
        return line.split()
    return [part.strip() for part in line.split(delim)]


def _detect_delimiter(line: str) -> str | None:
    if "\t" in line:
        return "\t"
    if "," in line:
        return ","
    return None


def parse_edge_list(
    path: str | Path,
    duplicate_policy: str = "sum",
    directed_collapse: str = "sum",
    weight_column: str = "weight",
    zero_weight_epsilon: float | None = None,
    largest_component: bool = False,
) -> WeightedGraph:
    """Parse a weighted edge list into a validated graph.

    Repeated rows for the same ordered pair are merged per duplicate_policy
    ("sum" or "reject"); reciprocal directed rows (u->v and v->u) are merged
    per directed_collapse ("sum", "max" or "mean"). A file with a header row
    selects the weight column by name; otherwise the third column is used.
    Datasets without any weight column fail loudly.
    """
    if duplicate_policy not in ("sum", "reject"):
        raise ParseError(f"duplicate_policy must be 'sum' or 'reject', got {duplicate_policy!r}")
    if directed_collapse not in ("sum", "max", "mean"):
        raise ParseError(f"directed_collapse must be sum/max/mean, got {directed_collapse!r}")

    path = Path(path)
    labels: dict[str, int] = {}
    ordered: dict[tuple[int, int], float] = {}
    delim: str | None = None
    w_idx = 2
    header_seen = False

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                # A commented header row names the weight column; other
                # comments are ignored.
                stripped = line.lstrip("#").strip()
                if not header_seen and stripped:
                    names = [p.lower() for p in _split(stripped, _detect_delimiter(stripped))]
                    if weight_column.lower() in names and len(names) >= 3:
                        w_idx = names.index(weight_column.lower())
                        header_seen = True
                continue
            if delim is None:
                delim = _detect_delimiter(line)
            parts = _split(line, delim)
            if not header_seen:
                header_seen = True
                if len(parts) < 3:
                    raise ParseError(
                        f"{path}:{lineno}: no weight column found; refusing unweighted input"
                    )
                if not _is_float(parts[2]):
                    w_idx = _weight_index(parts, weight_column, path)
                    continue
            if len(parts) <= w_idx:
                raise ParseError(f"{path}:{lineno}: expected at least {w_idx + 1} columns, got {len(parts)}")
            a, b = parts[0], parts[1]
            try:
                w = float(parts[w_idx])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: weight {parts[w_idx]!r} is not a number") from None
            if zero_weight_epsilon is not None and w == 0.0:
                w = zero_weight_epsilon
            ia = labels.setdefault(a, len(labels))
            ib = labels.setdefault(b, len(labels))
            key = (ia, ib)
            if key in ordered:
                if duplicate_policy == "reject":
                    raise RejectedEdge(f"{path}:{lineno}: duplicate ordered pair {a!r}->{b!r}")
                ordered[key] += w
            else:
                ordered[key] = w

    if not ordered:
        raise ParseError(f"{path}: no edge rows found")

    merged: dict[tuple[int, int], float] = {}
    for (ia, ib), w in ordered.items():
        key = (ia, ib) if ia < ib else (ib, ia)
        if key in merged:
            if directed_collapse == "sum":
                merged[key] += w
            elif directed_collapse == "max":
                merged[key] = max(merged[key], w)
            else:
                merged[key] = (merged[key] + w) / 2.0
        else:
            merged[key] = w

    id_to_label = [None] * len(labels)
    for lab, i in labels.items():
        id_to_label[i] = lab
    edges = [(u, v, w) for (u, v), w in merged.items()]
    g = build_graph(edges, len(labels), labels=id_to_label)
    if largest_component:
        g = _restrict_to_largest_component(g)
    return g


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _weight_index(header: list[str], weight_column: str, path: Path) -> int:
    names = [h.strip().lower() for h in header]
    if weight_column.lower() in names:
        return names.index(weight_column.lower())
    raise ParseError(
        f"{path}: header {names} has no column named {weight_column!r}; "
        "pass weight_column to select one"
    )


def _restrict_to_largest_component(g: WeightedGraph) -> WeightedGraph:
    comp = connected_components(g)
    keep_comp = int(np.argmax(np.bincount(comp)))
    keep_nodes = np.flatnonzero(comp == keep_comp)
    remap = np.full(g.node_count, -1, dtype=np.int64)
    remap[keep_nodes] = np.arange(keep_nodes.shape[0])
    mask = (remap[g.edges_u] >= 0) & (remap[g.edges_v] >= 0)
    labels = None
    if g.labels is not None:
        labels = [g.labels[i] for i in keep_nodes]
    return build_graph(
        (
            remap[g.edges_u[mask]].astype(np.int32),
            remap[g.edges_v[mask]].astype(np.int32),
            g.edges_w[mask],
        ),
        keep_nodes.shape[0],
        labels=labels,
    )


def write_edge_list(g: WeightedGraph, path: str | Path, use_labels: bool = False) -> None:
    """Write tab-separated source/target/weight rows, full float precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, w in zip(g.edges_u, g.edges_v, g.edges_w):
            if use_labels and g.labels is not None:
                fh.write(f"{g.labels[u]}\t{g.labels[v]}\t{float(w)!r}\n")
            else:
                fh.write(f"{int(u)}\t{int(v)}\t{float(w)!r}\n")
