"""Netzschleuder catalog access for the study's 11 real networks.

Each entry pins the catalog dataset (and sub-network where the record holds
several), the expected node/edge counts, and whether the study figures match
the largest connected component. Downloads are cached by name with a content
hash; ingestion warns instead of failing when upstream counts drift.
"""

from __future__ import annotations

import hashlib
import io
import json
import urllib.request
import warnings
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .edgelist import parse_edge_list
from .errors import NetworkUnavailable, UnknownDataset, UpstreamFormatChanged
from .graph import WeightedGraph

__all__ = ["DatasetInfo", "STUDY_NETWORKS", "fetch_dataset", "load_dataset", "dataset_names"]

BASE_URL = "https://networks.skewed.de/net"

Transport = Callable[[str], bytes]


@dataclass(frozen=True)
class DatasetInfo:
    dataset: str
    network: str | None
    nodes: int
    edges: int
    mean_degree: float
    use_lcc: bool = False

    @property
    def url(self) -> str:
        fname = self.network or self.dataset
        return f"{BASE_URL}/{self.dataset}/files/{fname}.csv.zip"


STUDY_NETWORKS: dict[str, DatasetInfo] = {
    "sp_high_school_diaries": DatasetInfo("sp_high_school_diaries", None, 120, 348, 5.8),
    "celegansneural": DatasetInfo("celegansneural", None, 297, 2148, 14.5),
    "fao_trade": DatasetInfo("fao_trade", None, 214, 9441, 88.2),
    "celegans_2019_hermaphrodite": DatasetInfo(
        "celegans_2019", "hermaphrodite_chemical", 446, 4210, 18.9
    ),
    "celegans_2019_male": DatasetInfo("celegans_2019", "male_chemical", 559, 4560, 16.3),
    "faculty_hiring_us_academia": DatasetInfo(
        "faculty_hiring_us", "academia", 3284, 52163, 31.8
    ),
    "cintestinalis": DatasetInfo("cintestinalis", None, 205, 2624, 25.6),
    "budapest_connectome_all_200k": DatasetInfo(
        "budapest_connectome", "all_200k", 1015, 105293, 207.5
    ),
    "new_zealand_collab": DatasetInfo("new_zealand_collab", None, 1463, 4246, 5.8, use_lcc=True),
    "bible_nouns": DatasetInfo("bible_nouns", None, 1707, 9059, 10.6),
    "netscience": DatasetInfo("netscience", None, 379, 914, 4.8, use_lcc=True),
}


def dataset_names() -> tuple[str, ...]:
    return tuple(STUDY_NETWORKS)


def _default_transport(url: str) -> bytes:
    try:
        with urllib.request.urlopen(url, timeout=60) as resp:
            return resp.read()
    except Exception as exc:
        raise NetworkUnavailable(f"failed to fetch {url}: {exc}") from exc


def _lookup(name: str) -> DatasetInfo:
    key = name.lower().replace("-", "_").replace(" ", "_")
    if key not in STUDY_NETWORKS:
        raise UnknownDataset(
            f"unknown dataset {name!r}; supported names: {', '.join(STUDY_NETWORKS)}"
        )
    return STUDY_NETWORKS[key]


def _extract_edges_csv(payload: bytes, name: str) -> bytes:
    try:
        zf = zipfile.ZipFile(io.BytesIO(payload))
    except zipfile.BadZipFile as exc:
        raise UpstreamFormatChanged(f"{name}: download is not a zip archive") from exc
    members = [m for m in zf.namelist() if m.endswith("edges.csv")]
    if not members:
        raise UpstreamFormatChanged(
            f"{name}: archive has no edges.csv (members: {zf.namelist()[:5]})"
        )
    return zf.read(members[0])


def fetch_dataset(
    name: str,
    cache_dir: str | Path = "data",
    transport: Transport | None = None,
    offline: bool = False,
) -> Path:
    """Return the local edges.csv for a study network, downloading on miss.

    A cache hit never touches the network. ``transport`` maps a URL to raw
    bytes and exists so tests can inject fake downloads.
    """
    info = _lookup(name)
    key = name.lower().replace("-", "_").replace(" ", "_")
    cache_dir = Path(cache_dir)
    edges_path = cache_dir / key / "edges.csv"
    if edges_path.exists():
        return edges_path
    if offline:
        raise NetworkUnavailable(f"{name}: not cached under {cache_dir} and offline mode is on")

    payload = (transport or _default_transport)(info.url)
    edges = _extract_edges_csv(payload, name)
    edges_path.parent.mkdir(parents=True, exist_ok=True)
    edges_path.write_bytes(edges)
    meta = {
        "name": key,
        "url": info.url,
        "sha256": hashlib.sha256(payload).hexdigest(),
        "expected_nodes": info.nodes,
        "expected_edges": info.edges,
    }
    (cache_dir / key / "meta.json").write_text(json.dumps(meta, indent=2))
    return edges_path


def load_dataset(
    name: str,
    cache_dir: str | Path = "data",
    transport: Transport | None = None,
    offline: bool = False,
    duplicate_policy: str = "sum",
    directed_collapse: str = "sum",
    weight_column: str = "weight",
) -> WeightedGraph:
    """Fetch (or reuse) a study network and parse it to a validated graph.

    Warns when the parsed node/edge counts drift from the study's reported
    values; catalog exports evolve and a drift is not necessarily fatal.
    """
    info = _lookup(name)
    path = fetch_dataset(name, cache_dir, transport, offline)
    g = parse_edge_list(
        path,
        duplicate_policy=duplicate_policy,
        directed_collapse=directed_collapse,
        weight_column=weight_column,
        largest_component=info.use_lcc,
    )
    if g.node_count != info.nodes or g.edge_count != info.edges:
        warnings.warn(
            f"{name}: parsed N={g.node_count}, E={g.edge_count} but the study reports "
            f"N={info.nodes}, E={info.edges}; upstream export may have changed",
            stacklevel=2,
        )
    return g
