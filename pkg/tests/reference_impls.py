"""Independent brute-force references used as test oracles.

Everything here recomputes results straight from the definitions with
plain dicts, loops, and exhaustive enumeration: no networkx, no numpy
vectorization, and no calls into the code paths under test.
"""

from __future__ import annotations

import math
from collections import Counter


# ---------------------------------------------------------------------------
# Structural report
# ---------------------------------------------------------------------------


def bf_report(nodes: set[str], edges: set[tuple[str, str]], seed_ids: set[str]) -> dict:
    """Recompute every report field by exhaustive enumeration.

    ``edges`` are distinct (child, parent) pairs; endpoints must be nodes.
    """

    def degree(v: str) -> int:
        return sum(1 for c, p in edges if v in (c, p))

    unlinked = sum(1 for s in seed_ids if s not in nodes or degree(s) == 0)
    counted = {v for v in nodes if not (v in seed_ids and degree(v) == 0)}
    pairs = {(c, p) for c, p in edges if c in counted and p in counted}

    n = len(counted)
    parents = {v: {p for c, p in pairs if c == v} for v in counted}
    children = {v: {c for c, p in pairs if p == v} for v in counted}

    roots = {v for v in counted if not parents[v] and children[v]}
    leaves = {v for v in counted if not children[v] and parents[v]}

    dist = _bf_all_pairs_shortest(counted, pairs)
    diameter = max(
        (d for (u, v), d in dist.items() if u != v),
        default=0,
    )

    depth_samples = []
    for root in roots:
        for leaf in leaves:
            if (leaf, root) in dist:
                depth_samples.append(dist[(leaf, root)])
    avg_depth = sum(depth_samples) / len(depth_samples) if depth_samples else 0.0

    return {
        "nodes": n,
        "new_nodes": sum(1 for v in counted if v not in seed_ids),
        "unlinked": unlinked,
        "edges": len(pairs),
        "density": len(pairs) / (n * (n - 1)) if n > 1 else 0.0,
        "roots": len(roots),
        "leaves": len(leaves),
        "max_parents": max((len(parents[v]) for v in counted), default=0),
        "avg_parents": sum(len(parents[v]) for v in counted) / n if n else 0.0,
        "avg_depth": avg_depth,
        "diameter": diameter,
        "max_children": max((len(children[v]) for v in counted), default=0),
        "avg_children": sum(len(children[v]) for v in counted) / n if n else 0.0,
        "components": _bf_component_count(counted, pairs),
        "loops": sum(1 for c, p in pairs if c == p),
        "cycles": len(bf_simple_cycles(counted, pairs)),
    }


def _bf_all_pairs_shortest(nodes: set[str], pairs: set[tuple[str, str]]) -> dict:
    adjacency = {v: set() for v in nodes}
    for c, p in pairs:
        adjacency[c].add(p)
    dist: dict[tuple[str, str], int] = {}
    for start in nodes:
        frontier = [start]
        local = {start: 0}
        while frontier:
            nxt = []
            for v in frontier:
                for w in adjacency[v]:
                    if w not in local:
                        local[w] = local[v] + 1
                        nxt.append(w)
            frontier = nxt
        for v, d in local.items():
            dist[(start, v)] = d
    return dist


def _bf_component_count(nodes: set[str], pairs: set[tuple[str, str]]) -> int:
    group = {v: v for v in nodes}

    def find(v):
        while group[v] != v:
            group[v] = group[group[v]]
            v = group[v]
        return v

    for c, p in pairs:
        group[find(c)] = find(p)
    return len({find(v) for v in nodes})


def bf_simple_cycles(nodes: set[str], pairs: set[tuple[str, str]]) -> list[list[str]]:
    """All simple directed cycles of length >= 2, each reported once with
    its smallest node first."""
    adjacency = {v: sorted({p for c, p in pairs if c == v}) for v in nodes}
    cycles: list[list[str]] = []

    def walk(start: str, current: str, path: list[str], visited: set[str]):
        for nxt in adjacency[current]:
            if nxt == start and len(path) >= 2:
                cycles.append(list(path))
            elif nxt not in visited and nxt > start:
                visited.add(nxt)
                path.append(nxt)
                walk(start, nxt, path, visited)
                path.pop()
                visited.discard(nxt)

    for start in sorted(nodes):
        walk(start, start, [start], {start})
    return cycles


def bf_single_edge_fixes(nodes: set[str], pairs: set[tuple[str, str]]) -> set[tuple[str, str]]:
    """Edges whose lone removal makes the graph acyclic."""
    out = set()
    for pair in pairs:
        remaining = pairs - {pair}
        if not bf_simple_cycles(nodes, remaining) and not any(c == p for c, p in remaining):
            out.add(pair)
    return out


# ---------------------------------------------------------------------------
# TOPSIS
# ---------------------------------------------------------------------------


def bf_topsis(values: list[list[float]], weights: list[float] | None = None) -> list[float]:
    """Direct formula recomputation for all-minimized criteria, pure Python."""
    n_rows = len(values)
    n_cols = len(values[0])
    if weights is None:
        weights = [1.0 / n_cols] * n_cols
    else:
        total = sum(weights)
        weights = [w / total for w in weights]

    norms = [math.sqrt(sum(values[i][j] ** 2 for i in range(n_rows))) for j in range(n_cols)]
    weighted = [
        [
            (values[i][j] / norms[j] if norms[j] else 0.0) * weights[j]
            for j in range(n_cols)
        ]
        for i in range(n_rows)
    ]
    ideal = [min(weighted[i][j] for i in range(n_rows)) for j in range(n_cols)]
    anti = [max(weighted[i][j] for i in range(n_rows)) for j in range(n_cols)]

    scores = []
    for i in range(n_rows):
        d_plus = math.sqrt(sum((weighted[i][j] - ideal[j]) ** 2 for j in range(n_cols)))
        d_minus = math.sqrt(sum((weighted[i][j] - anti[j]) ** 2 for j in range(n_cols)))
        scores.append(1.0 if d_plus + d_minus == 0 else d_minus / (d_plus + d_minus))
    return scores


def bf_pareto(values: list[list[float]]) -> set[int]:
    """Indices of non-dominated rows, all criteria minimized."""
    out = set()
    for i, row in enumerate(values):
        dominated = False
        for k, other in enumerate(values):
            if k != i and all(o <= r for o, r in zip(other, row)) and any(
                o < r for o, r in zip(other, row)
            ):
                dominated = True
                break
        if not dominated:
            out.add(i)
    return out


# ---------------------------------------------------------------------------
# Krippendorff's alpha (nominal)
# ---------------------------------------------------------------------------


def bf_alpha(units: list[list[int]]) -> float:
    """Pairwise-enumeration route: observed disagreement averaged within
    units, expected disagreement over every cross pair of pooled values."""
    usable = [u for u in units if len(u) >= 2]
    n = sum(len(u) for u in usable)
    if n == 0:
        raise ValueError("no pairable values")

    observed = 0.0
    for unit in usable:
        m = len(unit)
        disagreements = sum(
            1 for i in range(m) for j in range(m) if i != j and unit[i] != unit[j]
        )
        observed += disagreements / (m - 1)
    observed /= n

    pooled = [v for unit in usable for v in unit]
    expected = sum(
        1
        for i in range(n)
        for j in range(n)
        if i != j and pooled[i] != pooled[j]
    ) / (n * (n - 1))

    if expected == 0.0:
        return 1.0
    return 1.0 - observed / expected


def bf_alpha_fast(units: list[list[int]]) -> float:
    """Margin-count variant of the brute-force route, for larger tables."""
    usable = [u for u in units if len(u) >= 2]
    n = sum(len(u) for u in usable)
    if n == 0:
        raise ValueError("no pairable values")
    observed = 0.0
    margins: Counter = Counter()
    for unit in usable:
        m = len(unit)
        counts = Counter(unit)
        margins.update(counts)
        observed += (m * m - sum(c * c for c in counts.values())) / (m - 1)
    observed /= n
    expected = (n * n - sum(c * c for c in margins.values())) / (n * (n - 1))
    return 1.0 if expected == 0.0 else 1.0 - observed / expected
