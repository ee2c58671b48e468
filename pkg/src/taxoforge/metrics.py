"""Structural report for one taxonomy relative to a seed list.

All statistics are computed over the "counted" node set: every node except
seed terms that have no incident edge (the unlinked isolates). Edge counts
ignore source provenance, so a pair contributed by two datasources counts
once.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import networkx as nx

from .graph import DEFAULT_CYCLE_CAP, TaxonomyGraph
from .seeds import SeedList


@dataclass
class MetricsReport:
    nodes: int
    new_nodes: int
    unlinked: int
    edges: int
    density: float
    roots: int
    leaves: int
    max_parents: int
    avg_parents: float
    avg_depth: float
    diameter: int
    max_children: int
    avg_children: float
    components: int
    loops: int
    cycles: int
    cycles_saturated: bool = False

    METRIC_FIELDS = (
        "nodes",
        "new_nodes",
        "unlinked",
        "edges",
        "density",
        "roots",
        "leaves",
        "max_parents",
        "avg_parents",
        "avg_depth",
        "diameter",
        "max_children",
        "avg_children",
        "components",
        "loops",
        "cycles",
    )

    def as_row(self) -> list:
        return [getattr(self, name) for name in self.METRIC_FIELDS]


def _counted_subgraph(g: TaxonomyGraph, seed_ids: set[str]) -> tuple["nx.DiGraph", int]:
    """Distinct-pair digraph minus unlinked seed isolates; also returns the
    unlinked count (seed terms absent from the graph count as unlinked)."""
    digraph = g.to_networkx()
    degree = {n: 0 for n in digraph.nodes}
    for c, p in digraph.edges:
        degree[c] += 1
        if p != c:
            degree[p] += 1
    unlinked = 0
    isolates = []
    for sid in seed_ids:
        if sid not in degree:
            unlinked += 1
        elif degree[sid] == 0:
            unlinked += 1
            isolates.append(sid)
    digraph.remove_nodes_from(isolates)
    return digraph, unlinked


def diameter(g: TaxonomyGraph) -> int:
    """Longest finite shortest path over ordered node pairs; 0 if edgeless."""
    return _diameter_of(g.to_networkx())


def _diameter_of(digraph: "nx.DiGraph") -> int:
    best = 0
    for source, dists in nx.all_pairs_shortest_path_length(digraph):
        for target, d in dists.items():
            if target != source:
                best = max(best, d)
    return best


def avg_depth(g: TaxonomyGraph) -> float:
    """Mean shortest root -> leaf distance over all reachable pairs."""
    return _avg_depth_of(g.to_networkx())


def _roots_leaves(digraph: "nx.DiGraph") -> tuple[list[str], list[str]]:
    # Edges run child -> parent, so a node's parents are its successors.
    roots = [n for n in digraph.nodes if digraph.out_degree(n) == 0 and digraph.in_degree(n) > 0]
    leaves = [n for n in digraph.nodes if digraph.in_degree(n) == 0 and digraph.out_degree(n) > 0]
    return roots, leaves


def _avg_depth_of(digraph: "nx.DiGraph") -> float:
    roots, leaves = _roots_leaves(digraph)
    root_set = set(roots)
    distances = []
    for leaf in leaves:
        dists = nx.single_source_shortest_path_length(digraph, leaf)
        for node, d in dists.items():
            if node in root_set:
                distances.append(d)
    if not distances:
        return 0.0
    return sum(distances) / len(distances)


def compute_report(
    g: TaxonomyGraph, seed: SeedList, cycle_cap: int = DEFAULT_CYCLE_CAP
) -> MetricsReport:
    seed_ids = seed.ids
    digraph, unlinked = _counted_subgraph(g, seed_ids)
    n = digraph.number_of_nodes()
    pair_edges = digraph.number_of_edges()
    new_nodes = sum(1 for node in digraph.nodes if node not in seed_ids)

    density = pair_edges / (n * (n - 1)) if n > 1 else 0.0

    roots, leaves = _roots_leaves(digraph)
    parent_counts = [digraph.out_degree(node) for node in digraph.nodes]
    child_counts = [digraph.in_degree(node) for node in digraph.nodes]

    loops = sum(1 for c, p in digraph.edges if c == p)
    acyclic_view = digraph.copy()
    acyclic_view.remove_edges_from(nx.selfloop_edges(acyclic_view))
    cycles_list, saturated = _bounded_cycles(acyclic_view, cycle_cap)

    return MetricsReport(
        nodes=n,
        new_nodes=new_nodes,
        unlinked=unlinked,
        edges=pair_edges,
        density=density,
        roots=len(roots),
        leaves=len(leaves),
        max_parents=max(parent_counts, default=0),
        avg_parents=sum(parent_counts) / n if n else 0.0,
        avg_depth=_avg_depth_of(digraph),
        diameter=_diameter_of(digraph),
        max_children=max(child_counts, default=0),
        avg_children=sum(child_counts) / n if n else 0.0,
        components=nx.number_weakly_connected_components(digraph),
        loops=loops,
        cycles=len(cycles_list),
        cycles_saturated=saturated,
    )


def _bounded_cycles(digraph: "nx.DiGraph", cap: int) -> tuple[list, bool]:
    found = []
    for cycle in nx.simple_cycles(digraph):
        found.append(cycle)
        if len(found) > cap:
            return found[:cap], True
    return found, False


METRICS_CSV_HEADER = ["config_id", *MetricsReport.METRIC_FIELDS]


def write_metrics_csv(path: str | Path, rows: list[tuple[str, MetricsReport]]) -> None:
    """One row per taxonomy: config id followed by the report fields."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_CSV_HEADER)
        for config_id, report in rows:
            writer.writerow([config_id, *report.as_row()])


_FLOAT_FIELDS = {"density", "avg_parents", "avg_depth", "avg_children"}


def read_metrics_csv(path: str | Path) -> list[tuple[str, MetricsReport]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            kwargs = {}
            for name in MetricsReport.METRIC_FIELDS:
                raw = row[name]
                kwargs[name] = float(raw) if name in _FLOAT_FIELDS else int(raw)
            out.append((row["config_id"], MetricsReport(**kwargs)))
    return out
