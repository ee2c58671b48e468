"""Embedding providers and cosine-similarity utilities.

Two provider modes exist: FILE (a precomputed ``label,v0,v1,...`` table,
fully offline and byte-deterministic) and HTTP (a remote embedding
endpoint). Vectors are unit-normalized at load so cosine reduces to a dot
product.
"""

from __future__ import annotations

import csv
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import requests

from .errors import DegenerateVector, DimensionError, ProviderError

ENV_EMBED_URL = "TAXOFORGE_EMBED_URL"
ENV_EMBED_TOKEN = "TAXOFORGE_EMBED_TOKEN"

DEFAULT_HTTP_PARALLELISM = 4


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity in [-1, 1]; rejects mismatched or zero vectors."""
    a = np.asarray(u, dtype=float)
    b = np.asarray(v, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise DegenerateVector("cosine is undefined for the zero vector")
    value = float(np.dot(a, b) / (norm_a * norm_b))
    return max(-1.0, min(1.0, value))


class EmbeddingProvider:
    """Interface: deterministic label -> unit vector for a fixed snapshot."""

    provider_id: str

    def embed(self, label: str) -> np.ndarray:
        raise NotImplementedError

    def embed_many(self, labels: Sequence[str]) -> list[np.ndarray]:
        return [self.embed(label) for label in labels]


class FileEmbeddingProvider(EmbeddingProvider):
    """Reads a ``label,v0,v1,...,vN`` CSV once; lock-free lookups after."""

    def __init__(self, provider_id: str, table_path: str | Path):
        self.provider_id = provider_id
        self.table_path = Path(table_path)
        self._vectors: dict[str, np.ndarray] = {}
        self._dim: int | None = None
        self._load()

    def _load(self) -> None:
        with open(self.table_path, encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row:
                    continue
                label, *components = row
                try:
                    vec = np.array([float(x) for x in components], dtype=float)
                except ValueError:
                    raise ProviderError(f"{self.table_path}:{lineno}: non-numeric component")
                if vec.size == 0 or not np.all(np.isfinite(vec)):
                    raise ProviderError(f"{self.table_path}:{lineno}: bad vector for {label!r}")
                if self._dim is None:
                    self._dim = vec.size
                elif vec.size != self._dim:
                    raise DimensionError(
                        f"{self.table_path}:{lineno}: expected {self._dim} components, got {vec.size}"
                    )
                norm = float(np.linalg.norm(vec))
                if norm == 0.0:
                    raise DegenerateVector(f"{self.table_path}:{lineno}: zero vector for {label!r}")
                self._vectors[label] = vec / norm

    def embed(self, label: str) -> np.ndarray:
        try:
            return self._vectors[label]
        except KeyError:
            raise ProviderError(f"label not in embedding table: {label!r}")

    def known_labels(self) -> set[str]:
        return set(self._vectors)


class HttpEmbeddingProvider(EmbeddingProvider):
    """POSTs ``{"texts": [...]}`` to a remote endpoint, expects
    ``{"vectors": [[...], ...]}``; bounded parallel batches."""

    def __init__(
        self,
        provider_id: str,
        base_url: str | None = None,
        token: str | None = None,
        parallelism: int = DEFAULT_HTTP_PARALLELISM,
        session: requests.Session | None = None,
        timeout: float = 30.0,
    ):
        self.provider_id = provider_id
        self.base_url = base_url or os.environ.get(ENV_EMBED_URL)
        if not self.base_url:
            raise ProviderError(f"no embedding endpoint configured (set {ENV_EMBED_URL})")
        self.token = token or os.environ.get(ENV_EMBED_TOKEN)
        self.parallelism = max(1, parallelism)
        self.session = session or requests.Session()
        self.timeout = timeout
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def _post(self, labels: Sequence[str]) -> list[np.ndarray]:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            resp = self.session.post(
                self.base_url,
                json={"model": self.provider_id, "texts": list(labels)},
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except requests.RequestException as exc:
            raise ProviderError(f"embedding request failed: {exc}")
        vectors = payload.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(labels):
            raise ProviderError("embedding response shape mismatch")
        out = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=float)
            norm = float(np.linalg.norm(arr))
            if norm == 0.0:
                raise DegenerateVector("endpoint returned a zero vector")
            out.append(arr / norm)
        return out

    def embed(self, label: str) -> np.ndarray:
        with self._lock:
            if label in self._cache:
                return self._cache[label]
        vec = self._post([label])[0]
        with self._lock:
            self._cache[label] = vec
        return vec

    def embed_many(self, labels: Sequence[str]) -> list[np.ndarray]:
        unique = list(dict.fromkeys(labels))
        with self._lock:
            todo = [l for l in unique if l not in self._cache]
        if todo:
            chunks = [todo[i : i + 32] for i in range(0, len(todo), 32)]
            with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
                for chunk, vecs in zip(chunks, pool.map(self._post, chunks)):
                    with self._lock:
                        for label, vec in zip(chunk, vecs):
                            self._cache[label] = vec
        with self._lock:
            return [self._cache[l] for l in labels]


def alias_similarity(a: Iterable[str], b: Iterable[str], provider: EmbeddingProvider) -> float:
    """Maximum pairwise cosine over the two alias sets.

    The max aggregation means any one matching surface form is enough to
    count two terms as similar. Identical strings short-circuit to 1.0.
    """
    set_a = list(dict.fromkeys(a))
    set_b = list(dict.fromkeys(b))
    if not set_a or not set_b:
        raise DegenerateVector("alias sets must be non-empty")
    if set(set_a) & set(set_b):
        return 1.0
    vecs_a = provider.embed_many(set_a)
    vecs_b = provider.embed_many(set_b)
    best = -1.0
    for va in vecs_a:
        for vb in vecs_b:
            best = max(best, cosine(va, vb))
    return best
