"""Computer-science ontology dump adapter.

Parses the distribution's ``subject,predicate,object`` triple CSV, keeping
three relations: the broader->narrower topic link, the alias->canonical
mapping, and the external-id link used to match seed entity ids. Seed
linking requires both an entity-id match and an alias-similarity pass,
because the dump's external links are partly wrong and surface similarity
is the cheap guard against importing a mislabeled subtree.
"""

from __future__ import annotations

import csv
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import unquote

from ..embeddings import EmbeddingProvider, alias_similarity
from ..errors import InvalidArgument, ParseError
from ..graph import CSO, SEED, TaxonomyGraph, canonicalize_label
from ..seeds import SeedList

logger = logging.getLogger(__name__)

SUPER_TOPIC = "superTopicOf"
PREF_EQUIV = "preferentialEquivalent"
SAME_AS = "sameAs"

_QID_IN_URI = re.compile(r"(Q[0-9]+)$")


@dataclass
class CsoGraph:
    super_topic_of: set[tuple[str, str]] = field(default_factory=set)  # (narrower, broader)
    preferential_equivalent: dict[str, str] = field(default_factory=dict)
    same_as: dict[str, set[str]] = field(default_factory=dict)
    skipped_predicates: Counter = field(default_factory=Counter)

    def canonical(self, term: str) -> str:
        return self.preferential_equivalent.get(term, term)

    def aliases_of(self, canonical_term: str) -> set[str]:
        aliases = {canonical_term}
        aliases.update(
            alias
            for alias, target in self.preferential_equivalent.items()
            if target == canonical_term
        )
        return aliases

    def qids_of(self, term: str) -> set[str]:
        qids = set()
        for external in self.same_as.get(term, ()):
            if "wikidata" in external:
                match = _QID_IN_URI.search(external)
                if match:
                    qids.add(match.group(1))
            elif _QID_IN_URI.fullmatch(external):
                qids.add(external)
        return qids


def _uri_label(uri: str) -> str:
    """Readable label from a topic URI: last path segment, percent-decoded,
    underscores to spaces."""
    cleaned = uri.strip().strip("<>").strip('"')
    segment = cleaned.rstrip("/").rsplit("/", 1)[-1]
    return unquote(segment).replace("_", " ")


def _predicate_name(uri: str) -> str:
    cleaned = uri.strip().strip("<>")
    for sep in ("#", "/"):
        if sep in cleaned:
            cleaned = cleaned.rsplit(sep, 1)[-1]
    return cleaned


def parse_cso_dump(path: str | Path) -> CsoGraph:
    """Load the triple CSV, keeping only the three relations of interest."""
    graph = CsoGraph()
    with open(path, encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
            subject, predicate, obj = row
            name = _predicate_name(predicate)
            if name == SUPER_TOPIC:
                # subject is the broader topic of the object.
                graph.super_topic_of.add((_uri_label(obj), _uri_label(subject)))
            elif name == PREF_EQUIV:
                graph.preferential_equivalent[_uri_label(subject)] = _uri_label(obj)
            elif name == SAME_AS:
                cleaned = obj.strip().strip("<>").strip('"')
                graph.same_as.setdefault(_uri_label(subject), set()).add(cleaned)
            else:
                graph.skipped_predicates[name] += 1
    _compress_equivalences(graph)
    return graph


def _compress_equivalences(graph: CsoGraph) -> None:
    # Resolve alias chains so one application of canonical() is enough.
    for alias in list(graph.preferential_equivalent):
        target = graph.preferential_equivalent[alias]
        seen = {alias}
        while target in graph.preferential_equivalent and target not in seen:
            seen.add(target)
            target = graph.preferential_equivalent[target]
        graph.preferential_equivalent[alias] = target
    for alias, target in list(graph.preferential_equivalent.items()):
        if alias == target:
            del graph.preferential_equivalent[alias]


@dataclass
class CsoLinkConfig:
    sim_threshold: float
    provider: EmbeddingProvider

    def __post_init__(self):
        if not 0.0 <= self.sim_threshold <= 1.0:
            raise InvalidArgument(f"similarity threshold out of [0, 1]: {self.sim_threshold}")


def link_seed_to_cso(
    seed: SeedList, cso: CsoGraph, cfg: CsoLinkConfig
) -> tuple[dict[str, str], list[tuple[str, str, float]]]:
    """Match seed terms to ontology terms.

    A term links when a topic's external ids contain the seed's entity id
    AND the alias similarity clears the threshold. Returns the id -> topic
    map plus the similarity-gated rejections for audit.
    """
    qid_index: dict[str, set[str]] = {}
    for term in set(cso.same_as):
        canonical = cso.canonical(term)
        for qid in cso.qids_of(term):
            qid_index.setdefault(qid, set()).add(canonical)

    links: dict[str, str] = {}
    rejected: list[tuple[str, str, float]] = []
    for entry in seed.entries:
        candidates = sorted(qid_index.get(entry.qid, ()))
        best: tuple[float, str] | None = None
        for candidate in candidates:
            similarity = alias_similarity({entry.label}, cso.aliases_of(candidate), cfg.provider)
            if similarity >= cfg.sim_threshold:
                if best is None or similarity > best[0]:
                    best = (similarity, candidate)
            else:
                rejected.append((entry.id, candidate, similarity))
        if best is not None:
            links[entry.id] = best[1]
    return links, rejected


def build_cso_taxonomy(seed: SeedList, links: dict[str, str], cso: CsoGraph) -> TaxonomyGraph:
    """Ancestor closure of the linked terms, aliases collapsed first.

    Unlinked seed terms stay in the graph as isolated nodes so coverage
    stays measurable downstream.
    """
    # Collapse the topic pairs through the alias map; synonym pairs that
    # collapse onto one term become self-loops, kept for the cleaning stage.
    collapsed_parents: dict[str, set[str]] = {}
    for narrower, broader in cso.super_topic_of:
        n, b = cso.canonical(narrower), cso.canonical(broader)
        collapsed_parents.setdefault(n, set()).add(b)

    # Topic -> node id: linked topics surface under the seed's own label.
    rep: dict[str, str] = {}
    for entry in seed.entries:
        topic = links.get(entry.id)
        if topic is not None and topic not in rep:
            rep[topic] = entry.id

    def node_id(topic: str) -> str:
        return rep.get(topic, canonicalize_label(topic))

    g = TaxonomyGraph()
    for entry in seed.entries:
        g.add_term(
            entry.label,
            qid=entry.qid,
            genericity_cluster=entry.cluster,
            origins={SEED},
        )

    for entry in seed.entries:
        topic = links.get(entry.id)
        if topic is None:
            continue
        g.terms[entry.id].aliases.update(cso.aliases_of(topic) - {entry.label})
        # Seeds sharing one linked topic each get their own copy of its
        # parent edges, so the frontier carries the node id to attach to.
        frontier = [(topic, entry.id)]
        seen = {topic}
        while frontier:
            current, current_id = frontier.pop()
            for parent in sorted(collapsed_parents.get(current, ())):
                parent_id = node_id(parent)
                if parent_id not in g:
                    g.add_term(parent, aliases=cso.aliases_of(parent) - {parent}, origins={CSO})
                g.add_edge(current_id, parent_id, CSO)
                if parent not in seen:
                    seen.add(parent)
                    frontier.append((parent, parent_id))
    return g


def write_rejected_links_csv(path: str | Path, rejected: list[tuple[str, str, float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["seed", "cso_term", "similarity"])
        for seed_id, topic, similarity in sorted(rejected):
            writer.writerow([seed_id, topic, f"{similarity:.6f}"])
