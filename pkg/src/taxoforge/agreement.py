"""Agreement statistics over binary pair annotations.

Tables hold {0, 1} judgments of (child, parent) pairs by any number of
raters, with absent combinations meaning "not annotated". Alpha is the
nominal-data coincidence-matrix form: units with fewer than two values are
excluded, observed disagreement is compared against the disagreement
expected from the value margins, and perfect homogeneity (zero expected
disagreement) is defined as 1.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, UndefinedAlpha, UnknownRater

Pair = tuple[str, str]


@dataclass
class AnnotationTable:
    pairs: list[Pair] = field(default_factory=list)
    raters: list[str] = field(default_factory=list)
    values: dict[tuple[Pair, str], int] = field(default_factory=dict)

    def __post_init__(self):
        self._pair_set = set(self.pairs)
        self._rater_set = set(self.raters)

    def add(self, pair: Pair, rater: str, value: int) -> None:
        if value not in (0, 1):
            raise ParseError(f"annotation value must be 0 or 1, got {value!r}")
        if pair not in self._pair_set:
            self.pairs.append(pair)
            self._pair_set.add(pair)
        if rater not in self._rater_set:
            self.raters.append(rater)
            self._rater_set.add(rater)
        self.values[(pair, rater)] = value

    def ratings_of(self, pair: Pair) -> list[int]:
        return [self.values[(pair, r)] for r in self.raters if (pair, r) in self.values]

    def rater_values(self, rater: str) -> list[int]:
        if rater not in self.raters:
            raise UnknownRater(f"unknown rater: {rater!r}")
        return [self.values[(p, rater)] for p in self.pairs if (p, rater) in self.values]

    def restrict(self, raters: list[str]) -> "AnnotationTable":
        out = AnnotationTable()
        for pair in self.pairs:
            for rater in raters:
                if (pair, rater) in self.values:
                    out.add(pair, rater, self.values[(pair, rater)])
        return out

    @classmethod
    def from_csv(cls, path: str | Path) -> "AnnotationTable":
        table = cls()
        with open(path, encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            expected = ["child", "parent", "rater", "value"]
            if reader.fieldnames != expected:
                raise ParseError(f"expected header {expected}, got {reader.fieldnames}")
            for lineno, row in enumerate(reader, start=2):
                try:
                    value = int(row["value"])
                except (TypeError, ValueError):
                    raise ParseError(f"bad value {row['value']!r}", line=lineno)
                if value not in (0, 1):
                    raise ParseError(f"value must be 0 or 1, got {value}", line=lineno)
                table.add((row["child"], row["parent"]), row["rater"], value)
        return table


def krippendorff_alpha(table: AnnotationTable) -> float:
    """Nominal-data alpha: 1 - observed/expected disagreement."""
    units = [vals for pair in table.pairs if len(vals := table.ratings_of(pair)) >= 2]
    n = sum(len(vals) for vals in units)
    if n == 0:
        raise UndefinedAlpha("no unit has two or more ratings")

    observed = 0.0
    for vals in units:
        counts = Counter(vals)
        m = len(vals)
        disagreeing_ordered = m * m - sum(c * c for c in counts.values())
        observed += disagreeing_ordered / (m - 1)
    observed /= n

    margins = Counter()
    for vals in units:
        margins.update(vals)
    expected = (n * n - sum(c * c for c in margins.values())) / (n * (n - 1))

    if expected == 0.0:
        return 1.0
    return 1.0 - observed / expected


def pairwise_alpha(
    table: AnnotationTable,
) -> dict[tuple[str, str], tuple[int, float | None]]:
    """Per rater pair: (number of shared pairs, alpha on just those pairs).

    Alpha is None when the two raters share no annotated pair; the diagonal
    compares a rater with itself and is always (own count, 1.0).
    """
    out: dict[tuple[str, str], tuple[int, float | None]] = {}
    for r1 in table.raters:
        for r2 in table.raters:
            if r1 == r2:
                out[(r1, r2)] = (len(table.rater_values(r1)), 1.0)
                continue
            sub = AnnotationTable()
            shared = 0
            for pair in table.pairs:
                v1 = table.values.get((pair, r1))
                v2 = table.values.get((pair, r2))
                if v1 is None or v2 is None:
                    continue
                shared += 1
                sub.add(pair, r1, v1)
                sub.add(pair, r2, v2)
            if shared == 0:
                out[(r1, r2)] = (0, None)
            else:
                out[(r1, r2)] = (shared, krippendorff_alpha(sub))
    return out


VOTE_BUCKETS = ("0", "1", "2", "3", ">3")


def vote_histogram(table: AnnotationTable) -> dict[str, int]:
    """Pairs bucketed by how many raters marked them correct (value 1)."""
    hist = {bucket: 0 for bucket in VOTE_BUCKETS}
    for pair in table.pairs:
        positive = sum(table.ratings_of(pair))
        hist[str(positive) if positive <= 3 else ">3"] += 1
    return hist


def score_share(table: AnnotationTable, rater: str) -> tuple[float, float]:
    """Fractions of a rater's annotations valued 0 and 1."""
    vals = table.rater_values(rater)
    if not vals:
        raise UnknownRater(f"rater {rater!r} has no annotations")
    ones = sum(vals)
    total = len(vals)
    return (total - ones) / total, ones / total


def with_rater(
    table: AnnotationTable, rater: str, verdicts: dict[Pair, int]
) -> AnnotationTable:
    """Copy of the table with one extra rater column (e.g. a model judge)."""
    out = AnnotationTable()
    for pair in table.pairs:
        for existing in table.raters:
            if (pair, existing) in table.values:
                out.add(pair, existing, table.values[(pair, existing)])
        if pair in verdicts:
            out.add(pair, rater, verdicts[pair])
    for pair, value in verdicts.items():
        if pair not in table._pair_set:
            out.add(pair, rater, value)
    return out
