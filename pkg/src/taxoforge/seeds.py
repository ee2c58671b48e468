"""Seed term list ingestion.

The seed file is a CSV with header ``label,qid,cluster`` where ``cluster``
is the genericity rank bucket (0 = most generic). Labels and entity ids
must be unique and clusters must form a contiguous range starting at 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import DuplicateSeedEntry, InvalidArgument, InvalidClustering, ParseError
from .graph import canonicalize_label, validate_qid


@dataclass(frozen=True)
class SeedEntry:
    label: str
    qid: str
    cluster: int

    @property
    def id(self) -> str:
        return canonicalize_label(self.label)


@dataclass(frozen=True)
class SeedList:
    entries: tuple[SeedEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def ids(self) -> set[str]:
        return {e.id for e in self.entries}

    @property
    def qids(self) -> set[str]:
        return {e.qid for e in self.entries}

    def by_id(self, term_id: str) -> SeedEntry | None:
        for e in self.entries:
            if e.id == term_id:
                return e
        return None

    def cluster_count(self) -> int:
        return max((e.cluster for e in self.entries), default=-1) + 1


def parse_seed(path: str | Path) -> SeedList:
    """Load and validate a seed CSV. Pure: same bytes, same result."""
    entries: list[SeedEntry] = []
    seen_ids: set[str] = set()
    seen_qids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = ["label", "qid", "cluster"]
        if reader.fieldnames != expected:
            raise ParseError(f"expected header {expected}, got {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            label = (row["label"] or "").strip()
            if not label:
                raise ParseError("empty label", line=lineno)
            qid = validate_qid((row["qid"] or "").strip())
            try:
                cluster = int(row["cluster"])
            except (TypeError, ValueError):
                raise ParseError(f"bad cluster value {row['cluster']!r}", line=lineno)
            if cluster < 0:
                raise ParseError(f"negative cluster {cluster}", line=lineno)
            entry = SeedEntry(label=label, qid=qid, cluster=cluster)
            if entry.id in seen_ids:
                raise DuplicateSeedEntry(f"duplicate label {label!r}")
            if qid in seen_qids:
                raise DuplicateSeedEntry(f"duplicate entity id {qid}")
            seen_ids.add(entry.id)
            seen_qids.add(qid)
            entries.append(entry)
    clusters = {e.cluster for e in entries}
    if clusters and clusters != set(range(max(clusters) + 1)):
        raise InvalidClustering(
            f"clusters must cover 0..{max(clusters)} contiguously, got {sorted(clusters)}"
        )
    return SeedList(entries=tuple(entries))


def generic_head(seed: SeedList, clusters: int) -> set[str]:
    """Term ids of the ``clusters`` most generic buckets (cluster < clusters)."""
    total = seed.cluster_count()
    if clusters < 1 or clusters > total:
        raise InvalidArgument(f"clusters must be in 1..{total}, got {clusters}")
    return {e.id for e in seed.entries if e.cluster < clusters}
