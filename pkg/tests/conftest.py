from __future__ import annotations

import random
from pathlib import Path

import numpy as np
import pytest

from taxoforge.embeddings import EmbeddingProvider
from taxoforge.graph import LLM, SEED, TaxonomyGraph
from taxoforge.seeds import SeedEntry, SeedList

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def build_graph(
    edges: list[tuple[str, str]] | list[tuple[str, str, str]],
    nodes: list[str] = (),
    seed_ids: set[str] | None = None,
    source: str = LLM,
) -> TaxonomyGraph:
    """Small-graph builder: nodes get SEED origin when listed in seed_ids."""
    seed_ids = seed_ids or set()
    g = TaxonomyGraph()
    mentioned = list(nodes)
    for edge in edges:
        mentioned.extend(edge[:2])
    for node in mentioned:
        g.add_term(node, origins={SEED} if node in seed_ids else {LLM})
    for edge in edges:
        child, parent = edge[0], edge[1]
        tag = edge[2] if len(edge) == 3 else source
        g.add_edge(child, parent, tag)
    return g


def make_seed(entries: list[tuple[str, str, int]]) -> SeedList:
    return SeedList(entries=tuple(SeedEntry(label=l, qid=q, cluster=c) for l, q, c in entries))


def random_digraph(
    rng: random.Random,
    max_nodes: int = 12,
    edge_probability: float = 0.3,
    allow_self_loops: bool = False,
    force_cycle: bool = False,
) -> tuple[set[str], set[tuple[str, str]]]:
    """Random node/edge sets for oracle-equivalence sweeps."""
    n = rng.randint(2, max_nodes)
    nodes = {f"n{i:02d}" for i in range(n)}
    ordered = sorted(nodes)
    edges = set()
    for c in ordered:
        for p in ordered:
            if c == p and not allow_self_loops:
                continue
            if rng.random() < edge_probability:
                edges.add((c, p))
    if force_cycle and n >= 2:
        a, b = rng.sample(ordered, 2)
        edges.add((a, b))
        edges.add((b, a))
    return nodes, edges


def graph_from_sets(
    nodes: set[str], edges: set[tuple[str, str]], seed_ids: set[str] | None = None
) -> TaxonomyGraph:
    g = TaxonomyGraph()
    seed_ids = seed_ids or set()
    for node in sorted(nodes):
        g.add_term(node, origins={SEED} if node in seed_ids else {LLM})
    for child, parent in sorted(edges):
        g.add_edge(child, parent, LLM)
    return g


class SeededVectorProvider(EmbeddingProvider):
    """Deterministic per-label pseudo-embeddings for property tests: each
    label hashes to an RNG seed, so distinct labels get (almost surely)
    non-parallel unit vectors and repeated calls are stable."""

    def __init__(self, provider_id: str = "seeded-test-vectors", dim: int = 8):
        self.provider_id = provider_id
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def embed(self, label: str) -> np.ndarray:
        if label not in self._cache:
            import hashlib

            digest = hashlib.sha256(f"{self.provider_id}:{label}".encode()).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
            vec = rng.normal(size=self.dim)
            self._cache[label] = vec / np.linalg.norm(vec)
        return self._cache[label]


class PairedVectorProvider(EmbeddingProvider):
    """Explicit label -> vector map for tests that need exact similarities."""

    def __init__(self, table: dict[str, list[float]], provider_id: str = "paired-test-vectors"):
        self.provider_id = provider_id
        self._vectors = {
            label: np.asarray(vec, dtype=float) / np.linalg.norm(vec)
            for label, vec in table.items()
        }

    def embed(self, label: str) -> np.ndarray:
        from taxoforge.errors import ProviderError

        try:
            return self._vectors[label]
        except KeyError:
            raise ProviderError(f"no vector for {label!r}")
