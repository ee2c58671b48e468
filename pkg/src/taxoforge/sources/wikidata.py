"""Knowledge-base adapter: entity fetching with an on-disk cache and the
depth/type-filtered subclass-of traversal.

Every fetched entity is normalized to a small JSON document under
``<cache>/Q*.json`` so sweeps are replayable offline; entities that do not
exist are cached negatively for the same reason. Traversal order is fixed
(id-sorted frontier) to keep builds reproducible.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import requests

from ..errors import EntityNotFound, FetchError, InvalidArgument
from ..graph import SEED, WIKIDATA, TaxonomyGraph, canonicalize_label, validate_qid
from ..seeds import SeedList

logger = logging.getLogger(__name__)

SUBCLASS_OF = "P279"
INSTANCE_OF = "P31"

DEFAULT_API_URL = "https://www.wikidata.org/w/api.php"
ENV_API_URL = "TAXOFORGE_WIKIDATA_URL"

DEFAULT_FETCH_PARALLELISM = 8
MAX_TRAVERSAL_DEPTH = 10


@dataclass
class WdEntity:
    qid: str
    label: str
    aliases: set[str]
    subclass_of: list[str]
    instance_of: list[str]

    def __post_init__(self):
        validate_qid(self.qid)
        self.subclass_of = sorted(set(self.subclass_of))
        self.instance_of = sorted(set(self.instance_of))

    def to_json(self) -> dict:
        return {
            "qid": self.qid,
            "label": self.label,
            "aliases": sorted(self.aliases),
            "subclassOf": self.subclass_of,
            "instanceOf": self.instance_of,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "WdEntity":
        return cls(
            qid=doc["qid"],
            label=doc["label"],
            aliases=set(doc.get("aliases", [])),
            subclass_of=list(doc.get("subclassOf", [])),
            instance_of=list(doc.get("instanceOf", [])),
        )


@dataclass
class WdConfig:
    take_all: bool = False
    type_threshold: int = 0
    max_depth: int = 3

    def __post_init__(self):
        if self.type_threshold < 0:
            raise InvalidArgument("type threshold must be >= 0")
        if not 1 <= self.max_depth <= MAX_TRAVERSAL_DEPTH:
            raise InvalidArgument(f"max depth must be in 1..{MAX_TRAVERSAL_DEPTH}")


class WikidataStore:
    """Cache-backed entity access; network use is optional and rate-limited."""

    def __init__(
        self,
        cache_dir: str | Path,
        offline: bool = False,
        api_url: str | None = None,
        session: requests.Session | None = None,
        parallelism: int = DEFAULT_FETCH_PARALLELISM,
        min_interval: float = 0.1,
        retries: int = 3,
        timeout: float = 30.0,
    ):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.offline = offline
        self.api_url = api_url or os.environ.get(ENV_API_URL, DEFAULT_API_URL)
        self.session = session or requests.Session()
        self.parallelism = max(1, parallelism)
        self.min_interval = min_interval
        self.retries = retries
        self.timeout = timeout
        self._rate_lock = threading.Lock()
        self._last_request = 0.0

    # -- cache ------------------------------------------------------------

    def _cache_path(self, qid: str) -> Path:
        return self.cache_dir / f"{qid}.json"

    def _cache_read(self, qid: str) -> dict | None:
        path = self._cache_path(qid)
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    def _cache_write(self, qid: str, doc: dict) -> None:
        path = self._cache_path(qid)
        tmp = path.with_suffix(".json.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, ensure_ascii=False, sort_keys=True, indent=1)
            fh.write("\n")
        tmp.replace(path)

    # -- fetching ---------------------------------------------------------

    def entity(self, qid: str) -> WdEntity:
        """Cache hit -> identical bytes every time; miss -> fetch, normalize,
        cache, return. Missing entities raise and are cached negatively."""
        validate_qid(qid)
        cached = self._cache_read(qid)
        if cached is not None:
            if cached.get("missing"):
                raise EntityNotFound(f"{qid} (negative cache)")
            return WdEntity.from_json(cached)
        if self.offline:
            raise FetchError(f"offline mode and {qid} is not cached")
        doc = self._fetch_remote(qid)
        if doc is None:
            self._cache_write(qid, {"qid": qid, "missing": True})
            raise EntityNotFound(qid)
        self._cache_write(qid, doc)
        return WdEntity.from_json(doc)

    def entities(self, qids: list[str]) -> dict[str, WdEntity]:
        """Bounded-parallel bulk fetch; missing entities are skipped."""
        out: dict[str, WdEntity] = {}

        def grab(qid: str) -> tuple[str, WdEntity | None]:
            try:
                return qid, self.entity(qid)
            except EntityNotFound:
                return qid, None

        unique = sorted(set(qids))
        with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
            for qid, entity in pool.map(grab, unique):
                if entity is not None:
                    out[qid] = entity
        return out

    def _throttle(self) -> None:
        with self._rate_lock:
            wait = self._last_request + self.min_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()

    def _fetch_remote(self, qid: str) -> dict | None:
        params = {
            "action": "wbgetentities",
            "ids": qid,
            "props": "labels|aliases|claims",
            "languages": "en",
            "format": "json",
        }
        last_error: Exception | None = None
        for attempt in range(self.retries):
            self._throttle()
            try:
                resp = self.session.get(self.api_url, params=params, timeout=self.timeout)
                resp.raise_for_status()
                payload = resp.json()
                entity = payload.get("entities", {}).get(qid)
                if entity is None or "missing" in entity:
                    return None
                return _normalize_entity(qid, entity)
            except (requests.RequestException, ValueError) as exc:
                last_error = exc
                time.sleep(2**attempt * 0.25)
        raise FetchError(f"fetch of {qid} failed after {self.retries} attempts: {last_error}")


def _normalize_entity(qid: str, entity: dict) -> dict:
    label = entity.get("labels", {}).get("en", {}).get("value", qid)
    aliases = {a["value"] for a in entity.get("aliases", {}).get("en", [])}
    claims = entity.get("claims", {})

    def claim_targets(pid: str) -> list[str]:
        targets = []
        for claim in claims.get(pid, []):
            value = claim.get("mainsnak", {}).get("datavalue", {}).get("value", {})
            target = value.get("id") if isinstance(value, dict) else None
            if target:
                targets.append(target)
        return sorted(set(targets))

    return {
        "qid": qid,
        "label": label,
        "aliases": sorted(aliases),
        "subclassOf": claim_targets(SUBCLASS_OF),
        "instanceOf": claim_targets(INSTANCE_OF),
    }


def fetch_entity(qid: str, store: WikidataStore) -> WdEntity:
    return store.entity(qid)


def type_frequencies(entities: list[WdEntity]) -> Counter:
    """How often each type id appears across the given entities."""
    freq: Counter = Counter()
    for entity in entities:
        freq.update(entity.instance_of)
    return freq


def build_wikidata_taxonomy(
    seed: SeedList, cfg: WdConfig, store: WikidataStore
) -> TaxonomyGraph:
    """Breadth-first subclass-of expansion from every seed entity.

    Seed terms are always admitted (the seed is hand-curated); a newly
    discovered entity passes when take_all is set, when the type threshold
    is 0 (filter disabled), or when one of its types reaches the threshold
    frequency in the seed's type table. Nodes at the depth bound are kept
    but not expanded further.
    """
    seed_by_qid = {entry.qid: entry for entry in seed.entries}
    seed_entities = store.entities(sorted(seed_by_qid))
    type_table = type_frequencies(list(seed_entities.values()))

    def admitted(entity: WdEntity) -> bool:
        if entity.qid in seed_by_qid or cfg.take_all or cfg.type_threshold == 0:
            return True
        return any(type_table[t] >= cfg.type_threshold for t in entity.instance_of)

    g = TaxonomyGraph()
    for entry in seed.entries:
        g.add_term(entry.label, qid=entry.qid, genericity_cluster=entry.cluster, origins={SEED})

    node_of: dict[str, str] = {}  # qid -> node id
    for qid, entity in seed_entities.items():
        node_of[qid] = seed_by_qid[qid].id
        g.terms[node_of[qid]].aliases.update(entity.aliases | {entity.label})

    depth_of: dict[str, int] = {qid: 0 for qid in seed_entities}
    frontier = sorted(seed_entities)
    while frontier:
        next_frontier: set[str] = set()
        for qid in frontier:
            if depth_of[qid] >= cfg.max_depth:
                continue
            try:
                entity = store.entity(qid)
            except EntityNotFound:
                continue
            for parent_qid in entity.subclass_of:
                try:
                    parent = store.entity(parent_qid)
                except EntityNotFound:
                    continue
                if not admitted(parent):
                    continue
                if parent_qid not in node_of:
                    parent_node = canonicalize_label(parent.label)
                    if parent_node not in g:
                        g.add_term(parent.label, aliases=parent.aliases, origins={WIKIDATA})
                    else:
                        g.terms[parent_node].aliases.update(parent.aliases)
                    node_of[parent_qid] = parent_node
                    if g.terms[parent_node].qid is None:
                        g.terms[parent_node].qid = parent_qid
                g.add_edge(node_of[qid], node_of[parent_qid], WIKIDATA)
                if parent_qid not in depth_of:
                    depth_of[parent_qid] = depth_of[qid] + 1
                    next_frontier.add(parent_qid)
        frontier = sorted(next_frontier)
    return g
