import numpy as np
import pytest

from weightwalk.graph import build_graph


@pytest.fixture
def triangle():
    return build_graph([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], 3)


def random_graph(n, p, rng, w_low=0.1, w_high=1.0):
    """Small helper used across test modules: simple ER-style graph."""
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v, float(rng.uniform(w_low, w_high))))
    if not edges:
        edges = [(0, 1, 1.0)]
    return build_graph(edges, n)


def read_csv_without(path, drop=("wall_ms",)):
    """Rows of a result CSV with timing-like columns removed, for determinism checks."""
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    keep = [i for i, name in enumerate(header) if name not in drop]
    return [[row[i] for i in keep] for row in rows]
