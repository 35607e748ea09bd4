"""Ingestion and validation of long-format univariate time-series data.

The input contract is a UTF-8 CSV with a header row and (by default) the
columns ``id,timepoint,values`` plus an optional ``group`` label column.
Time indices only need to be orderable: they are sorted per series and
reindexed to 0..n-1. Values must be finite at ingestion; non-finite inputs
are an error here, never a silent pass-through.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConstantSeries,
    DuplicateTimepoint,
    EmptySeries,
    MissingColumn,
    NonNumericValue,
    UnlabeledSeries,
)

DEFAULT_ID_COL = "id"
DEFAULT_TIME_COL = "timepoint"
DEFAULT_VALUE_COL = "values"
DEFAULT_GROUP_COL = "group"


@dataclass(frozen=True)
class Dataset:
    """Validated collection of univariate series, keyed by series id.

    Immutable after construction; safe to share across workers. The
    ``series`` mapping is kept in sorted-id order so that iteration order
    never leaks into downstream results.
    """

    series: dict[str, np.ndarray]
    labels: dict[str, str] | None = None

    @property
    def ids(self) -> list[str]:
        return list(self.series)

    @property
    def n_series(self) -> int:
        return len(self.series)

    def label_of(self, series_id: str) -> str | None:
        return None if self.labels is None else self.labels[series_id]


def make_dataset(series: dict[str, np.ndarray], labels: dict[str, str] | None = None) -> Dataset:
    """Build a Dataset from raw vectors, enforcing the module invariants."""
    ordered: dict[str, np.ndarray] = {}
    for sid in sorted(series):
        x = np.asarray(series[sid], dtype=np.float64)
        if x.ndim != 1 or x.size < 2:
            raise EmptySeries(f"series {sid!r} has fewer than 2 observations")
        if not np.all(np.isfinite(x)):
            raise NonNumericValue(f"series {sid!r} contains non-finite values")
        x = x.copy()
        x.flags.writeable = False
        ordered[sid] = x
    if labels is not None:
        missing = sorted(set(ordered) - set(labels))
        if missing:
            raise UnlabeledSeries(f"series without a group label: {missing}")
        labels = {sid: labels[sid] for sid in ordered}
    return Dataset(series=ordered, labels=labels)


def ingest_long_csv(
    path: str | Path,
    id_col: str = DEFAULT_ID_COL,
    time_col: str = DEFAULT_TIME_COL,
    value_col: str = DEFAULT_VALUE_COL,
    group_col: str | None = None,
) -> Dataset:
    """Read a long-format CSV into a Dataset.

    Rows are grouped by id, sorted by time index and reindexed to 0..n-1.
    Labels are populated iff ``group_col`` is given.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return _ingest_rows(csv.reader(fh), str(path), id_col, time_col, value_col, group_col)


def ingest_long_text(
    text: str,
    id_col: str = DEFAULT_ID_COL,
    time_col: str = DEFAULT_TIME_COL,
    value_col: str = DEFAULT_VALUE_COL,
    group_col: str | None = None,
) -> Dataset:
    """Ingest from an in-memory CSV string (the upload path of the service)."""
    return _ingest_rows(
        csv.reader(io.StringIO(text, newline="")), "<upload>", id_col, time_col, value_col, group_col
    )


def _ingest_rows(reader, source: str, id_col, time_col, value_col, group_col) -> Dataset:
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumn(f"{source}: empty file, no header row") from None

    wanted = [id_col, time_col, value_col] + ([group_col] if group_col else [])
    missing = [c for c in wanted if c not in header]
    if missing:
        raise MissingColumn(f"{source}: missing column(s) {missing}, header is {header}")
    idx = {c: header.index(c) for c in wanted}

    rows: dict[str, list[tuple[float, float]]] = {}
    seen_t: dict[str, set[float]] = {}
    labels: dict[str, str] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(cell == "" for cell in row):
            continue
        sid = row[idx[id_col]]
        t = _parse_number(row[idx[time_col]], source, lineno, time_col)
        v = _parse_number(row[idx[value_col]], source, lineno, value_col)
        bucket = seen_t.setdefault(sid, set())
        if t in bucket:
            raise DuplicateTimepoint(f"{source}:{lineno}: duplicate timepoint {t:g} for id {sid!r}")
        bucket.add(t)
        rows.setdefault(sid, []).append((t, v))
        if group_col:
            g = row[idx[group_col]]
            if g == "":
                raise UnlabeledSeries(f"{source}:{lineno}: id {sid!r} has an empty {group_col!r} value")
            prev = labels.setdefault(sid, g)
            if prev != g:
                raise UnlabeledSeries(
                    f"{source}:{lineno}: id {sid!r} has conflicting labels {prev!r} and {g!r}"
                )

    if not rows:
        raise EmptySeries(f"{source}: no data rows")
    series = {
        sid: np.array([v for _, v in sorted(pairs)], dtype=np.float64)
        for sid, pairs in rows.items()
    }
    return make_dataset(series, labels if group_col else None)


def _parse_number(text: str, source: str, lineno: int, col: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise NonNumericValue(f"{source}:{lineno}: column {col!r} has non-numeric value {text!r}") from None
    if not math.isfinite(value):
        raise NonNumericValue(f"{source}:{lineno}: column {col!r} has non-finite value {text!r}")
    return value


def export_long_csv(d: Dataset, path: str | Path) -> None:
    """Write the dataset back in the ingestion schema (round-trip contract)."""
    path = Path(path)
    labeled = d.labels is not None
    header = [DEFAULT_ID_COL, DEFAULT_TIME_COL, DEFAULT_VALUE_COL]
    if labeled:
        header.append(DEFAULT_GROUP_COL)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for sid, x in d.series.items():
            for t, v in enumerate(x):
                row = [sid, str(t), repr(float(v))]
                if labeled:
                    row.append(d.labels[sid])
                writer.writerow(row)


def zscore_series(d: Dataset) -> Dataset:
    """Independently transform each series to mean 0 and unit sample sd.

    Raises ConstantSeries (naming every offending id) when any series has
    zero sample standard deviation.
    """
    constant = [sid for sid, x in d.series.items() if float(np.std(x, ddof=1)) == 0.0]
    if constant:
        raise ConstantSeries(f"cannot z-score constant series: {constant}")
    series = {}
    for sid, x in d.series.items():
        mu = float(np.mean(x))
        sd = float(np.std(x, ddof=1))
        series[sid] = (x - mu) / sd
    return make_dataset(series, d.labels)
