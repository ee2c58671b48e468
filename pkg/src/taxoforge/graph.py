"""Core taxonomy graph model.

Terms are keyed by a canonical label form; edges point from the narrower
term to the broader one (child IS-A parent) regardless of which datasource
produced them, and carry a source tag. Multiple parents per term are
allowed throughout.
"""

from __future__ import annotations

import csv
import re
import unicodedata
from dataclasses import dataclass, field
from itertools import islice
from pathlib import Path
from typing import Iterable, Iterator

import networkx as nx

from .errors import InvalidLabel, InvalidQid, MissingTerm

# Term origin tags (where a node was discovered).
SEED = "SEED"
CSO = "CSO"
WIKIDATA = "WIKIDATA"
LLM = "LLM"
ENSEMBLE = "ENSEMBLE"

ORIGIN_TAGS = frozenset({SEED, CSO, WIKIDATA, LLM})
EDGE_SOURCES = frozenset({CSO, WIKIDATA, LLM, ENSEMBLE})

QID_PATTERN = re.compile(r"^Q[0-9]+$")

# Bound on simple-cycle enumeration; reports say ">= cap" when saturated.
DEFAULT_CYCLE_CAP = 10_000


def canonicalize_label(raw: str) -> str:
    """Return the canonical key for a label.

    Unicode-normalized (NFKC), case-folded, trimmed, with internal runs of
    whitespace collapsed to single spaces. Applied to a fixpoint so the
    result is idempotent even for exotic code points.
    """
    if raw is None:
        raise InvalidLabel("label is None")
    text = raw
    for _ in range(8):
        folded = unicodedata.normalize("NFKC", text).casefold()
        collapsed = " ".join(folded.split())
        if collapsed == text:
            break
        text = collapsed
    if not text:
        raise InvalidLabel(f"label is empty after normalization: {raw!r}")
    return text


def validate_qid(qid: str) -> str:
    if not QID_PATTERN.match(qid or ""):
        raise InvalidQid(f"not a valid entity id: {qid!r}")
    return qid


@dataclass
class Term:
    """A taxonomy node: canonical id plus display/provenance metadata."""

    id: str
    label: str
    aliases: set[str] = field(default_factory=set)
    qid: str | None = None
    genericity_cluster: int | None = None
    origins: set[str] = field(default_factory=set)

    def __post_init__(self):
        if self.qid is not None:
            validate_qid(self.qid)


@dataclass(frozen=True, order=True)
class Edge:
    """Directed child -> parent (hyponym -> hypernym) edge with provenance."""

    child: str
    parent: str
    source: str


class TaxonomyGraph:
    """Mutable builder/value for a polyhierarchical taxonomy.

    Pipeline stages treat instances as immutable once built; the cleaning
    and ensemble operations return fresh copies instead of mutating.
    """

    def __init__(self):
        self.terms: dict[str, Term] = {}
        self.edges: set[Edge] = set()
        self._children: dict[str, set[str]] = {}
        self._parents: dict[str, set[str]] = {}

    # -- construction -----------------------------------------------------

    def add_term(
        self,
        label: str,
        aliases: Iterable[str] = (),
        qid: str | None = None,
        genericity_cluster: int | None = None,
        origins: Iterable[str] = (),
    ) -> Term:
        """Insert or enrich a term; repeated adds merge aliases and origins."""
        term_id = canonicalize_label(label)
        origin_set = set(origins)
        bad = origin_set - ORIGIN_TAGS
        if bad:
            raise InvalidLabel(f"unknown origin tags: {sorted(bad)}")
        existing = self.terms.get(term_id)
        if existing is None:
            term = Term(
                id=term_id,
                label=label.strip(),
                aliases=set(aliases),
                qid=qid,
                genericity_cluster=genericity_cluster,
                origins=origin_set,
            )
            self.terms[term_id] = term
            self._children.setdefault(term_id, set())
            self._parents.setdefault(term_id, set())
            return term
        existing.aliases.update(aliases)
        existing.origins.update(origin_set)
        if existing.qid is None and qid is not None:
            existing.qid = validate_qid(qid)
        if existing.genericity_cluster is None and genericity_cluster is not None:
            existing.genericity_cluster = genericity_cluster
        if existing.label != label and label.strip():
            existing.aliases.add(label.strip())
        return existing

    def add_edge(self, child: str, parent: str, source: str, upsert: bool = False) -> None:
        """Add a child -> parent edge; re-adding the same triple is a no-op.

        With ``upsert`` disabled both endpoints must already exist. With it
        enabled, missing endpoints are created as bare terms whose origin is
        the edge source (ENSEMBLE edges still need pre-added endpoints since
        ENSEMBLE is not an origin tag).
        """
        if source not in EDGE_SOURCES:
            raise InvalidLabel(f"unknown edge source: {source!r}")
        missing = [t for t in {child, parent} if t not in self.terms]
        if missing:
            if not upsert:
                raise MissingTerm(f"unknown term: {min(missing)!r}")
            if source not in ORIGIN_TAGS:
                raise MissingTerm(
                    f"cannot upsert {sorted(missing)} from source {source}; add the terms first"
                )
            for endpoint in missing:
                self.add_term(endpoint, origins={source})
        self.edges.add(Edge(child, parent, source))
        self._children.setdefault(parent, set()).add(child)
        self._parents.setdefault(child, set()).add(parent)

    def copy(self) -> "TaxonomyGraph":
        out = TaxonomyGraph()
        for term in self.terms.values():
            out.terms[term.id] = Term(
                id=term.id,
                label=term.label,
                aliases=set(term.aliases),
                qid=term.qid,
                genericity_cluster=term.genericity_cluster,
                origins=set(term.origins),
            )
            out._children[term.id] = set(self._children.get(term.id, ()))
            out._parents[term.id] = set(self._parents.get(term.id, ()))
        out.edges = set(self.edges)
        return out

    def remove_edge_pair(self, child: str, parent: str) -> list[Edge]:
        """Drop every source-tagged edge for the (child, parent) pair."""
        doomed = [e for e in self.edges if e.child == child and e.parent == parent]
        for e in doomed:
            self.edges.discard(e)
        if doomed:
            self._parents.get(child, set()).discard(parent)
            self._children.get(parent, set()).discard(child)
        return doomed

    def remove_term(self, term_id: str) -> None:
        """Drop a node and every edge touching it."""
        if term_id not in self.terms:
            raise MissingTerm(f"unknown term: {term_id!r}")
        for e in [e for e in self.edges if term_id in (e.child, e.parent)]:
            self.remove_edge_pair(e.child, e.parent)
        del self.terms[term_id]
        self._children.pop(term_id, None)
        self._parents.pop(term_id, None)
        for bucket in self._children.values():
            bucket.discard(term_id)
        for bucket in self._parents.values():
            bucket.discard(term_id)

    # -- queries ----------------------------------------------------------

    def __contains__(self, term_id: str) -> bool:
        return term_id in self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TaxonomyGraph):
            return NotImplemented
        return self.terms == other.terms and self.edges == other.edges

    def parents(self, term_id: str) -> set[str]:
        if term_id not in self.terms:
            raise MissingTerm(f"unknown term: {term_id!r}")
        return set(self._parents.get(term_id, ()))

    def children(self, term_id: str) -> set[str]:
        if term_id not in self.terms:
            raise MissingTerm(f"unknown term: {term_id!r}")
        return set(self._children.get(term_id, ()))

    def degree(self, term_id: str) -> int:
        """Number of distinct edge pairs incident to the node."""
        pairs = self.edge_pairs()
        return sum(1 for c, p in pairs if term_id in (c, p))

    def edge_pairs(self) -> set[tuple[str, str]]:
        """Distinct (child, parent) pairs, ignoring source provenance."""
        return {(e.child, e.parent) for e in self.edges}

    def self_loops(self) -> list[str]:
        return sorted({e.child for e in self.edges if e.child == e.parent})

    def ancestors(self, term_id: str, max_depth: int | None = None) -> set[str]:
        """Breadth-first closure over child -> parent edges, excluding the
        start term; cycle-safe (each node visited once)."""
        if term_id not in self.terms:
            raise MissingTerm(f"unknown term: {term_id!r}")
        if max_depth is not None and max_depth < 1:
            raise ValueError("max_depth must be positive")
        seen: set[str] = set()
        frontier = [term_id]
        depth = 0
        while frontier and (max_depth is None or depth < max_depth):
            depth += 1
            nxt: list[str] = []
            for node in frontier:
                for parent in self._parents.get(node, ()):
                    if parent not in seen and parent != term_id:
                        seen.add(parent)
                        nxt.append(parent)
            frontier = nxt
        return seen

    def weak_components(self) -> list[set[str]]:
        """Partition of all nodes ignoring direction, ordered by smallest
        member key."""
        comps = [set(c) for c in nx.weakly_connected_components(self.to_networkx())]
        return sorted(comps, key=min)

    def simple_cycles(self, cap: int = DEFAULT_CYCLE_CAP) -> tuple[list[list[str]], bool]:
        """Enumerate simple directed cycles of length >= 2.

        Self-loops are excluded (counted separately as loops). Stops after
        ``cap`` cycles; the second element flags the overflow.
        """
        if cap < 1:
            raise ValueError("cap must be positive")
        digraph = self.to_networkx()
        digraph.remove_edges_from(nx.selfloop_edges(digraph))
        found = list(islice(nx.simple_cycles(digraph), cap + 1))
        truncated = len(found) > cap
        return found[:cap], truncated

    def is_dag(self) -> bool:
        return nx.is_directed_acyclic_graph(self.to_networkx())

    def to_networkx(self) -> "nx.DiGraph":
        """Distinct-pair digraph with deterministic insertion order."""
        digraph = nx.DiGraph()
        digraph.add_nodes_from(sorted(self.terms))
        digraph.add_edges_from(sorted(self.edge_pairs()))
        return digraph

    # -- flat-file export / import ----------------------------------------

    def write_edges_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["child", "parent", "source"])
            for e in sorted(self.edges):
                writer.writerow([e.child, e.parent, e.source])

    def write_nodes_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id", "label", "qid", "origins", "cluster"])
            for term_id in sorted(self.terms):
                term = self.terms[term_id]
                writer.writerow(
                    [
                        term.id,
                        term.label,
                        term.qid or "",
                        "|".join(sorted(term.origins)),
                        "" if term.genericity_cluster is None else term.genericity_cluster,
                    ]
                )

    def to_dot(self) -> str:
        lines = ["digraph taxonomy {"]
        for term_id in sorted(self.terms):
            lines.append(f'  "{term_id}";')
        for e in sorted(self.edge_pairs()):
            lines.append(f'  "{e[0]}" -> "{e[1]}";')
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def read_csv(
        cls, edges_path: str | Path, nodes_path: str | Path | None = None
    ) -> "TaxonomyGraph":
        """Rebuild a graph from the edge-list export (and node list if given)."""
        g = cls()
        if nodes_path is not None:
            with open(nodes_path, encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    g.add_term(
                        row["label"] or row["id"],
                        qid=row["qid"] or None,
                        genericity_cluster=int(row["cluster"]) if row["cluster"] else None,
                        origins=[o for o in row["origins"].split("|") if o],
                    )
        with open(edges_path, encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                g.add_edge(row["child"], row["parent"], row["source"], upsert=True)
        return g


def iter_sorted_edges(g: TaxonomyGraph) -> Iterator[Edge]:
    return iter(sorted(g.edges))
