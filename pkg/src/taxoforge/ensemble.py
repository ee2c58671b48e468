"""Merging the per-source taxonomies.

Two strategies: a plain union with similarity-driven duplicate folding, and
a cascade that starts from the highest-priority source and imports, for
each still-unlinked seed term, that term's parent paths from the first
later source that linked it. A final pass can hand the leftover unlinked
terms to the chat model.
"""

from __future__ import annotations

import logging

from .embeddings import EmbeddingProvider, alias_similarity
from .errors import InvalidArgument
from .graph import SEED, TaxonomyGraph, Edge
from .seeds import SeedList
from .sources.llm import ChatClient, LlmConfig, complete_unlinked

logger = logging.getLogger(__name__)

DEFAULT_DEDUP_THRESHOLD = 0.90


def unlinked_ids(g: TaxonomyGraph, seed: SeedList) -> set[str]:
    """Seed terms with no incident edge in the graph."""
    touched = {e.child for e in g.edges} | {e.parent for e in g.edges}
    return {sid for sid in seed.ids if sid not in touched}


def plain_union(graphs: list[TaxonomyGraph]) -> TaxonomyGraph:
    out = TaxonomyGraph()
    for g in graphs:
        for term in g.terms.values():
            merged = out.add_term(
                term.label,
                aliases=term.aliases,
                qid=term.qid,
                genericity_cluster=term.genericity_cluster,
                origins=term.origins,
            )
            if merged.label != term.label:
                merged.aliases.add(term.label)
        for e in g.edges:
            out.add_edge(e.child, e.parent, e.source)
    return out


def union_merge(
    graphs: list[TaxonomyGraph],
    dedup_threshold: float = DEFAULT_DEDUP_THRESHOLD,
    provider: EmbeddingProvider | None = None,
) -> TaxonomyGraph:
    """Node/edge union, then fold node pairs whose alias similarity clears
    the threshold (most similar first, transitive, seed labels win)."""
    if len(graphs) < 2:
        raise InvalidArgument("union needs at least two graphs")
    if not 0.0 <= dedup_threshold <= 1.0:
        raise InvalidArgument(f"dedup threshold out of [0, 1]: {dedup_threshold}")
    merged = plain_union(graphs)
    if provider is None:
        return merged

    ids = sorted(merged.terms)
    candidates: list[tuple[float, str, str]] = []
    for i, a in enumerate(ids):
        aliases_a = {merged.terms[a].label} | merged.terms[a].aliases
        for b in ids[i + 1 :]:
            aliases_b = {merged.terms[b].label} | merged.terms[b].aliases
            similarity = alias_similarity(aliases_a, aliases_b, provider)
            if similarity >= dedup_threshold:
                candidates.append((similarity, a, b))
    if not candidates:
        return merged

    # Union-find keyed so that seed nodes (then lexicographic order) win.
    leader: dict[str, str] = {t: t for t in merged.terms}

    def find(x: str) -> str:
        while leader[x] != x:
            leader[x] = leader[leader[x]]
            x = leader[x]
        return x

    def rank(term_id: str) -> tuple[int, str]:
        is_seed = SEED in merged.terms[term_id].origins
        return (0 if is_seed else 1, term_id)

    for similarity, a, b in sorted(candidates, key=lambda c: (-c[0], c[1], c[2])):
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        keep, fold = sorted((ra, rb), key=rank)
        leader[fold] = keep

    out = TaxonomyGraph()
    for term_id in ids:
        term = merged.terms[term_id]
        target = find(term_id)
        if target == term_id:
            out.add_term(
                term.label,
                aliases=term.aliases,
                qid=term.qid,
                genericity_cluster=term.genericity_cluster,
                origins=term.origins,
            )
    for term_id in ids:
        target = find(term_id)
        if target != term_id:
            term = merged.terms[term_id]
            survivor = out.terms[target]
            survivor.aliases.update(term.aliases | {term.label})
            survivor.origins.update(term.origins)
            if survivor.qid is None and term.qid is not None:
                survivor.qid = term.qid
    for e in merged.edges:
        child, parent = find(e.child), find(e.parent)
        out.add_edge(child, parent, e.source)
    return out


def cascade_merge(
    ordered: list[tuple[TaxonomyGraph, str]], seed: SeedList
) -> TaxonomyGraph:
    """Priority merge: keep the first source whole; from each later source
    import only the ancestor paths of seed terms everything before it left
    unlinked. Imported edges keep their original source tags; path copying
    stops at nodes the result already contains."""
    if not ordered:
        raise InvalidArgument("cascade needs at least one graph")
    out = ordered[0][0].copy()
    for donor, _tag in ordered[1:]:
        donor_edges: dict[tuple[str, str], list[Edge]] = {}
        for e in sorted(donor.edges):
            donor_edges.setdefault((e.child, e.parent), []).append(e)

        def import_node(node_id: str) -> None:
            if node_id not in out:
                term = donor.terms[node_id]
                out.add_term(
                    term.label,
                    aliases=term.aliases,
                    qid=term.qid,
                    genericity_cluster=term.genericity_cluster,
                    origins=term.origins,
                )

        still_unlinked = unlinked_ids(out, seed)
        for sid in sorted(still_unlinked):
            if sid not in donor.terms:
                continue
            parents = donor.parents(sid)
            children = donor.children(sid)
            if not parents and not children:
                continue
            pre_existing = set(out.terms)
            import_node(sid)
            frontier = [sid]
            seen = {sid}
            while frontier:
                node = frontier.pop()
                for parent in sorted(donor.parents(node)):
                    import_node(parent)
                    for e in donor_edges[(node, parent)]:
                        out.add_edge(node, parent, e.source)
                    if parent not in seen and parent not in pre_existing:
                        seen.add(parent)
                        frontier.append(parent)
            if not parents:
                # Linked in the donor only downward: copy the direct child
                # edges so the term does not stay stranded.
                for child in sorted(children):
                    import_node(child)
                    for e in donor_edges[(child, sid)]:
                        out.add_edge(child, sid, e.source)
    return out


def llm_complete(
    g: TaxonomyGraph, seed: SeedList, cfg: LlmConfig, client: ChatClient
) -> TaxonomyGraph:
    """Delegate the leftover unlinked seed terms to the chat model; the
    result only ever gains nodes and edges."""
    return complete_unlinked(g, seed, cfg, client)
