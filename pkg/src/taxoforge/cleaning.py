"""Post-construction graph repair.

Three operations, applied in order when both toggles are on: self-loop
removal, depth-heuristic cycle breaking, and abstract-edge pruning for the
most generic seed terms. All are pure (input graphs are not mutated) and
idempotent.
"""

from __future__ import annotations

import logging

import networkx as nx

from .graph import TaxonomyGraph, SEED

logger = logging.getLogger(__name__)


def remove_self_loops(g: TaxonomyGraph) -> tuple[TaxonomyGraph, int]:
    """Drop every child == parent edge; nothing else changes."""
    out = g.copy()
    count = 0
    for node in out.self_loops():
        out.remove_edge_pair(node, node)
        count += 1
    return out, count


def _cycle_edge_pairs(g: TaxonomyGraph) -> set[tuple[str, str]]:
    """Distinct (child, parent) pairs lying on at least one directed cycle.

    An edge u->v is on a simple cycle exactly when u and v share a strongly
    connected component of size >= 2 (self-loops are assumed removed).
    """
    digraph = g.to_networkx()
    scc_of: dict[str, int] = {}
    scc_size: dict[int, int] = {}
    for idx, comp in enumerate(nx.strongly_connected_components(digraph)):
        scc_size[idx] = len(comp)
        for node in comp:
            scc_of[node] = idx
    return {
        (c, p)
        for c, p in g.edge_pairs()
        if c != p and scc_of[c] == scc_of[p] and scc_size[scc_of[c]] >= 2
    }


def node_depths(g: TaxonomyGraph) -> dict[str, int]:
    """Shortest hop count from a root, walking parent -> child.

    Roots are the zero-parent nodes of each weakly connected component.
    Nodes no root can reach (pure cycle pockets, or anything hanging above
    a cycle) get a sentinel depth of component diameter + 1, which makes
    the edges leading into such pockets read as pointing the wrong way.
    """
    depths: dict[str, int] = {}
    for component in g.weak_components():
        roots = sorted(node for node in component if not g.parents(node))
        # Multi-source BFS downward (parent -> child) over all edges.
        local: dict[str, int] = {r: 0 for r in roots}
        frontier = list(roots)
        while frontier:
            nxt: list[str] = []
            for node in frontier:
                for child in g.children(node):
                    if child in component and child not in local:
                        local[child] = local[node] + 1
                        nxt.append(child)
            frontier = nxt
        unreached = [node for node in component if node not in local]
        if unreached:
            sentinel = _component_diameter(g, component) + 1
            for node in unreached:
                local[node] = sentinel
        depths.update(local)
    return depths


def _component_diameter(g: TaxonomyGraph, component: set[str]) -> int:
    digraph = g.to_networkx().subgraph(component)
    best = 0
    for _, dists in nx.all_pairs_shortest_path_length(digraph):
        for target, d in dists.items():
            best = max(best, d)
    return best


def _on_cycle(g: TaxonomyGraph, child: str, parent: str) -> bool:
    # The pair closes a cycle iff the parent can still reach the child.
    if (child, parent) not in g.edge_pairs():
        return False
    seen = {parent}
    stack = [parent]
    while stack:
        node = stack.pop()
        if node == child:
            return True
        for nxt in g.parents(node):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def break_cycles(g: TaxonomyGraph) -> tuple[TaxonomyGraph, list[tuple[str, str]]]:
    """Remove edges until the graph is a DAG.

    Per round: recompute depths, then drop cycle edges whose parent sits
    deeper than the child (a child pointing down the hierarchy is the wrong
    way round). Each candidate is only removed while it still closes a
    cycle, so every removal kills at least one cycle. If a round finds no
    depth violations, the lexicographically largest (child, parent) cycle
    pair is removed as a deterministic fallback. Expects self-loops to be
    gone already.
    """
    out = g.copy()
    removed: list[tuple[str, str]] = []
    while True:
        cycle_pairs = _cycle_edge_pairs(out)
        if not cycle_pairs:
            break
        depths = node_depths(out)
        violating = sorted(
            (c, p) for c, p in cycle_pairs if depths.get(p, 0) > depths.get(c, 0)
        )
        candidates = violating if violating else [max(cycle_pairs)]
        for child, parent in candidates:
            # The first candidate always still closes a cycle; later ones
            # may not once earlier removals land.
            if _on_cycle(out, child, parent):
                out.remove_edge_pair(child, parent)
                removed.append((child, parent))
    return out, removed


def prune_abstract_edges(
    g: TaxonomyGraph, generic_set: set[str]
) -> tuple[TaxonomyGraph, list[tuple[str, str]]]:
    """Cut the parent edges of the most generic terms, then delete the
    ancestors that lost their last child (transitively). Nodes whose
    origins include SEED are never deleted; generic-set members missing
    from the graph are skipped with a warning.
    """
    out = g.copy()
    removed: list[tuple[str, str]] = []
    orphan_candidates: set[str] = set()
    for member in sorted(generic_set):
        if member not in out.terms:
            logger.warning("generic term %r not in graph; skipped", member)
            continue
        for parent in sorted(out.parents(member)):
            out.remove_edge_pair(member, parent)
            removed.append((member, parent))
            orphan_candidates.add(parent)
    while orphan_candidates:
        node = min(orphan_candidates)
        orphan_candidates.discard(node)
        if node not in out.terms:
            continue
        term = out.terms[node]
        if SEED in term.origins:
            continue
        if out.children(node):
            continue
        orphan_candidates.update(out.parents(node))
        out.remove_term(node)
    return out, removed


def clean(
    g: TaxonomyGraph,
    cycle: bool,
    abstract: bool,
    generic_set: set[str] | None = None,
) -> tuple[TaxonomyGraph, list[tuple[str, str, str]]]:
    """Apply the toggled repair steps; returns an audit trail of
    (operation, child, parent) rows."""
    audit: list[tuple[str, str, str]] = []
    out = g
    if cycle:
        out, _ = remove_self_loops(out)
        for node in g.self_loops():
            audit.append(("self_loop", node, node))
        out, broken = break_cycles(out)
        audit.extend(("cycle", c, p) for c, p in broken)
    if abstract:
        out, pruned = prune_abstract_edges(out, generic_set or set())
        audit.extend(("abstract", c, p) for c, p in pruned)
    return out, audit
