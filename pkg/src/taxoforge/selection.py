"""Configuration ranking: TOPSIS over the minimized metric subset, plus a
Pareto-front check.

The decision matrix uses the seven criteria the report minimizes. TOPSIS
here is the canonical form: vector (Euclidean) column normalization,
weighting, ideal/anti-ideal per criterion direction, Euclidean distances,
closeness score d- / (d+ + d-), descending ranking with id tie-breaks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InsufficientAlternatives, InvalidArgument, InvalidMatrix
from .metrics import MetricsReport

MIN_CRITERIA = (
    "new_nodes",
    "unlinked",
    "density",
    "roots",
    "diameter",
    "components",
    "cycles",
)


@dataclass
class DecisionMatrix:
    rows: list[str]
    columns: list[str]
    values: np.ndarray  # shape (len(rows), len(columns))
    directions: list[str] = field(default_factory=list)  # "MIN" per column here
    saturated: dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        if not self.directions:
            self.directions = ["MIN"] * len(self.columns)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.rows), len(self.columns)):
            raise InvalidMatrix(
                f"value shape {self.values.shape} does not match "
                f"{len(self.rows)} rows x {len(self.columns)} columns"
            )


@dataclass
class TopsisResult:
    scores: dict[str, float]
    ranking: list[str]


def build_matrix(reports: list[tuple[str, MetricsReport]]) -> DecisionMatrix:
    """Decision matrix over the minimized criteria, one row per config."""
    if len(reports) < 2:
        raise InsufficientAlternatives(f"need >= 2 reports, got {len(reports)}")
    rows = [config_id for config_id, _ in reports]
    if len(set(rows)) != len(rows):
        raise InvalidArgument("duplicate config ids in reports")
    values = np.array(
        [[float(getattr(report, name)) for name in MIN_CRITERIA] for _, report in reports]
    )
    saturated = {config_id: report.cycles_saturated for config_id, report in reports}
    return DecisionMatrix(rows=rows, columns=list(MIN_CRITERIA), values=values, saturated=saturated)


def topsis(m: DecisionMatrix, weights: np.ndarray | list[float] | None = None) -> TopsisResult:
    """Closeness-to-ideal scores in [0, 1] and the induced ranking."""
    values = m.values
    if not np.all(np.isfinite(values)):
        raise InvalidMatrix("matrix contains non-finite values")
    n_rows, n_cols = values.shape
    if weights is None:
        w = np.full(n_cols, 1.0 / n_cols)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n_cols,):
            raise InvalidArgument(f"weights must have {n_cols} entries")
        if np.any(w < 0) or not np.any(w > 0):
            raise InvalidArgument("weights must be non-negative and not all zero")
        w = w / w.sum()

    norms = np.linalg.norm(values, axis=0)
    norms[norms == 0.0] = 1.0  # all-zero column stays zero
    weighted = (values / norms) * w

    ideal = np.empty(n_cols)
    anti = np.empty(n_cols)
    for j, direction in enumerate(m.directions):
        col = weighted[:, j]
        if direction == "MIN":
            ideal[j], anti[j] = col.min(), col.max()
        elif direction == "MAX":
            ideal[j], anti[j] = col.max(), col.min()
        else:
            raise InvalidArgument(f"unknown direction {direction!r}")

    d_plus = np.linalg.norm(weighted - ideal, axis=1)
    d_minus = np.linalg.norm(weighted - anti, axis=1)
    denom = d_plus + d_minus
    scores_arr = np.where(denom == 0.0, 1.0, d_minus / np.where(denom == 0.0, 1.0, denom))

    scores = {row: float(s) for row, s in zip(m.rows, scores_arr)}
    ranking = sorted(m.rows, key=lambda r: (-scores[r], r))
    return TopsisResult(scores=scores, ranking=ranking)


def pareto_front(m: DecisionMatrix) -> set[str]:
    """Rows not dominated by any other row (all criteria oriented MIN)."""
    values = m.values.copy()
    for j, direction in enumerate(m.directions):
        if direction == "MAX":
            values[:, j] = -values[:, j]
    front: set[str] = set()
    for i, row in enumerate(m.rows):
        dominated = False
        for k in range(len(m.rows)):
            if k == i:
                continue
            if np.all(values[k] <= values[i]) and np.any(values[k] < values[i]):
                dominated = True
                break
        if not dominated:
            front.add(row)
    return front


def write_matrix_csv(path: str | Path, m: DecisionMatrix) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["config_id", *m.columns, "cycles_saturated"])
        writer.writerow(["direction", *m.directions, ""])
        for i, row in enumerate(m.rows):
            writer.writerow([row, *m.values[i].tolist(), int(m.saturated.get(row, False))])


def read_matrix_csv(path: str | Path) -> DecisionMatrix:
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        direction_row = next(reader)
        if header[0] != "config_id" or direction_row[0] != "direction":
            raise InvalidMatrix(f"unexpected matrix header in {path}")
        has_flag = header[-1] == "cycles_saturated"
        columns = header[1 : -1 if has_flag else None]
        directions = direction_row[1 : len(columns) + 1]
        rows, data, saturated = [], [], {}
        for line in reader:
            rows.append(line[0])
            data.append([float(x) for x in line[1 : len(columns) + 1]])
            if has_flag:
                saturated[line[0]] = bool(int(line[-1]))
    return DecisionMatrix(
        rows=rows, columns=columns, values=np.array(data), directions=directions, saturated=saturated
    )


def write_result_csv(path: str | Path, result: TopsisResult, front: set[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["config_id", "score", "rank", "on_pareto_front"])
        for rank, row in enumerate(result.ranking, start=1):
            writer.writerow([row, f"{result.scores[row]:.6f}", rank, int(row in front)])
