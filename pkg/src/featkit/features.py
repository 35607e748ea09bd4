"""Native time-series feature catalog and long-format extraction.

Every kernel is a pure function ``series -> float`` returning NaN whenever
its own precondition fails (too few samples, zero variance, ...) instead of
raising — failed evaluations feed the quality report and downstream filters.

The catalog covers distributional shape (tagged ``native_dist``) and
dynamical structure: autocorrelation, spectral, runs, trend and sliding
windows (tagged ``native_dyn``).
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .dataset import Dataset
from .errors import EmptyRegistry, EmptyTable, LengthMismatch

log = logging.getLogger(__name__)

DIST_SET = "native_dist"
DYN_SET = "native_dyn"


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def feat_mean(x: np.ndarray) -> float:
    return float(np.mean(x))


def feat_stddev(x: np.ndarray) -> float:
    """Sample standard deviation (n-1 denominator)."""
    return float(np.std(x, ddof=1))


def feat_skewness(x: np.ndarray) -> float:
    """Moment skewness m3 / m2^1.5 with biased central moments."""
    d = x - np.mean(x)
    m2 = float(np.mean(d * d))
    if m2 <= 0.0:
        return math.nan
    m3 = float(np.mean(d * d * d))
    return m3 / m2**1.5


def feat_kurtosis_excess(x: np.ndarray) -> float:
    """Excess kurtosis m4 / m2^2 - 3 with biased central moments."""
    d = x - np.mean(x)
    m2 = float(np.mean(d * d))
    if m2 <= 0.0:
        return math.nan
    m4 = float(np.mean(d**4))
    return m4 / (m2 * m2) - 3.0


def feat_median(x: np.ndarray) -> float:
    return float(np.median(x))


def feat_iqr(x: np.ndarray) -> float:
    """Interquartile range using linear-interpolation (type-7) quantiles."""
    q25, q75 = np.quantile(x, [0.25, 0.75])
    return float(q75 - q25)


def feat_min(x: np.ndarray) -> float:
    return float(np.min(x))


def feat_max(x: np.ndarray) -> float:
    return float(np.max(x))


def feat_mad(x: np.ndarray) -> float:
    """Median absolute deviation from the median."""
    return float(np.median(np.abs(x - np.median(x))))


def acf_at_lag(x: np.ndarray, k: int) -> float:
    """Autocorrelation at lag k: biased estimator, denominator N, demeaned.

    Because numerator and denominator share the 1/N factor this reduces to
    sum(d[t] * d[t+k]) / sum(d^2). NaN for zero-variance series or k >= N.
    """
    n = x.size
    if k >= n:
        return math.nan
    d = x - np.mean(x)
    denom = float(np.dot(d, d))
    if denom <= 0.0:
        return math.nan
    return float(np.dot(d[: n - k], d[k:])) / denom


def make_acf_lag(k: int) -> Callable[[np.ndarray], float]:
    def kernel(x: np.ndarray) -> float:
        # usable-lag rule: need N >= 2k+1 samples
        if k > (x.size - 1) // 2:
            return math.nan
        return acf_at_lag(x, k)

    kernel.__name__ = f"feat_acf_lag_{k}"
    return kernel


def feat_acf_first_zero(x: np.ndarray) -> float:
    """Smallest lag k <= floor(N/2) where the ACF drops to <= 0, else floor(N/2)."""
    n = x.size
    max_lag = n // 2
    if max_lag < 1 or float(np.std(x)) == 0.0:
        return math.nan
    for k in range(1, max_lag + 1):
        if acf_at_lag(x, k) <= 0.0:
            return float(k)
    return float(max_lag)


def feat_acf_sumsq_10(x: np.ndarray) -> float:
    """Sum of squared autocorrelations over lags 1..10."""
    if 10 > (x.size - 1) // 2:
        return math.nan
    vals = [acf_at_lag(x, k) for k in range(1, 11)]
    if any(math.isnan(v) for v in vals):
        return math.nan
    return float(sum(v * v for v in vals))


def _periodogram_positive(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Power at the positive DFT bins k = 1..floor(N/2), with frequencies k/N."""
    n = x.size
    spec = np.fft.rfft(x)
    kmax = n // 2
    power = np.abs(spec[1 : kmax + 1]) ** 2
    freqs = np.arange(1, kmax + 1) / n
    return freqs, power


def feat_spectral_entropy(x: np.ndarray) -> float:
    """Shannon entropy of the sum-normalized periodogram over positive DFT
    bins, divided by ln(#bins). 0 for a single-bin sinusoid, near 1 for
    white noise."""
    n = x.size
    if n // 2 < 2:
        return math.nan
    _, power = _periodogram_positive(x)
    total = float(np.sum(power))
    if total <= 0.0:
        return math.nan
    p = power / total
    nz = p[p > 0]
    h = -float(np.sum(nz * np.log(nz)))
    return h / math.log(p.size)


def feat_spectral_centroid(x: np.ndarray) -> float:
    """Power-weighted mean frequency (cycles/sample) of the periodogram."""
    if x.size // 2 < 1:
        return math.nan
    freqs, power = _periodogram_positive(x)
    total = float(np.sum(power))
    if total <= 0.0:
        return math.nan
    return float(np.sum(freqs * power)) / total


def feat_crossing_points(x: np.ndarray) -> float:
    """Number of mean crossings; values equal to the mean count as the
    positive side."""
    side = np.where(x - np.mean(x) >= 0.0, 1, -1)
    return float(np.sum(side[:-1] != side[1:]))


def feat_longest_stretch_above_mean(x: np.ndarray) -> float:
    """Length of the longest run of samples strictly above the mean."""
    above = x > np.mean(x)
    best = run = 0
    for flag in above:
        run = run + 1 if flag else 0
        if run > best:
            best = run
    return float(best)


def _trend_fit(x: np.ndarray) -> tuple[float, float]:
    n = x.size
    u = np.arange(n, dtype=np.float64) / (n - 1)
    um = u - np.mean(u)
    xm = x - np.mean(x)
    slope = float(np.dot(um, xm) / np.dot(um, um))
    ss_tot = float(np.dot(xm, xm))
    if ss_tot <= 0.0:
        return slope, math.nan
    resid = xm - slope * um
    ss_res = float(np.dot(resid, resid))
    return slope, 1.0 - ss_res / ss_tot


def feat_trend_slope(x: np.ndarray) -> float:
    """OLS slope of the series against time rescaled to [0, 1]."""
    return _trend_fit(x)[0]


def feat_trend_r2(x: np.ndarray) -> float:
    """R-squared of the linear trend fit; NaN for constant series."""
    return _trend_fit(x)[1]


def _window_views(x: np.ndarray) -> np.ndarray | None:
    """Non-overlapping windows of width max(2, floor(N/10)); trailing
    partial window dropped. None when fewer than 2 full windows fit."""
    n = x.size
    w = max(2, n // 10)
    m = n // w
    if m < 2:
        return None
    return x[: m * w].reshape(m, w)


def feat_stability(x: np.ndarray) -> float:
    """Sample variance of the non-overlapping window means."""
    wins = _window_views(x)
    if wins is None:
        return math.nan
    return float(np.var(wins.mean(axis=1), ddof=1))


def feat_lumpiness(x: np.ndarray) -> float:
    """Sample variance of the non-overlapping window variances."""
    wins = _window_views(x)
    if wins is None:
        return math.nan
    return float(np.var(wins.var(axis=1, ddof=1), ddof=1))


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureDescriptor:
    name: str
    set: str
    description: str
    needs_variance: bool
    fn: Callable[[np.ndarray], float]


def default_registry() -> list[FeatureDescriptor]:
    """The 24-feature native catalog."""
    d = FeatureDescriptor
    reg = [
        d("mean", DIST_SET, "arithmetic mean", False, feat_mean),
        d("stddev", DIST_SET, "sample standard deviation (n-1)", False, feat_stddev),
        d("skewness", DIST_SET, "moment skewness m3/m2^1.5", True, feat_skewness),
        d("kurtosis_excess", DIST_SET, "excess kurtosis m4/m2^2 - 3", True, feat_kurtosis_excess),
        d("median", DIST_SET, "median", False, feat_median),
        d("iqr", DIST_SET, "interquartile range (type-7 quantiles)", False, feat_iqr),
        d("min", DIST_SET, "minimum", False, feat_min),
        d("max", DIST_SET, "maximum", False, feat_max),
        d("mad", DIST_SET, "median absolute deviation", False, feat_mad),
    ]
    for k in (1, 2, 3, 5, 10):
        reg.append(
            d(f"acf_lag_{k}", DYN_SET, f"autocorrelation at lag {k}", True, make_acf_lag(k))
        )
    reg += [
        d("acf_first_zero", DYN_SET, "first lag where the ACF crosses zero", True, feat_acf_first_zero),
        d("acf_sumsq_10", DYN_SET, "sum of squared ACF values over lags 1-10", True, feat_acf_sumsq_10),
        d("spectral_entropy", DYN_SET, "normalized entropy of the periodogram", True, feat_spectral_entropy),
        d("spectral_centroid", DYN_SET, "power-weighted mean frequency", True, feat_spectral_centroid),
        d("crossing_points", DYN_SET, "number of mean crossings", False, feat_crossing_points),
        d("longest_stretch_above_mean", DYN_SET, "longest run above the mean", False, feat_longest_stretch_above_mean),
        d("trend_slope", DYN_SET, "OLS slope against rescaled time", False, feat_trend_slope),
        d("trend_r2", DYN_SET, "R^2 of the linear trend", True, feat_trend_r2),
        d("stability", DYN_SET, "variance of sliding-window means", False, feat_stability),
        d("lumpiness", DYN_SET, "variance of sliding-window variances", False, feat_lumpiness),
    ]
    return reg


# ---------------------------------------------------------------------------
# long-format feature table
# ---------------------------------------------------------------------------

CSV_HEADER = ["id", "names", "values", "method", "group"]


@dataclass
class FeatureTable:
    """Long-format feature records, one per (series id, feature name).

    All five columns are kept row-aligned; ``groups`` is None for unlabeled
    data. Rows are in canonical (id, name) sort order when produced by
    :func:`extract_features`.
    """

    ids: list[str]
    names: list[str]
    sets: list[str]
    values: np.ndarray
    groups: list[str] | None = None

    def __post_init__(self) -> None:
        n = len(self.ids)
        self.values = np.asarray(self.values, dtype=np.float64)
        if not (len(self.names) == len(self.sets) == self.values.size == n):
            raise LengthMismatch("feature table columns are not aligned")
        if self.groups is not None and len(self.groups) != n:
            raise LengthMismatch("group column is not aligned")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def labeled(self) -> bool:
        return self.groups is not None

    def series_ids(self) -> list[str]:
        return sorted(set(self.ids))

    def feature_names(self) -> list[str]:
        return sorted(set(self.names))

    def set_of(self) -> dict[str, str]:
        return dict(zip(self.names, self.sets))

    def group_of(self) -> dict[str, str]:
        if self.groups is None:
            return {}
        return dict(zip(self.ids, self.groups))

    def pivot(self) -> tuple[list[str], list[str], np.ndarray]:
        """Dense series x feature matrix in canonical sorted order.

        Missing (id, feature) pairs are a contract violation and raise.
        """
        row_ids = self.series_ids()
        col_names = self.feature_names()
        ri = {sid: i for i, sid in enumerate(row_ids)}
        ci = {name: j for j, name in enumerate(col_names)}
        matrix = np.full((len(row_ids), len(col_names)), np.nan)
        seen = np.zeros_like(matrix, dtype=bool)
        for sid, name, value in zip(self.ids, self.names, self.values):
            i, j = ri[sid], ci[name]
            if seen[i, j]:
                raise LengthMismatch(f"duplicate record for ({sid!r}, {name!r})")
            seen[i, j] = True
            matrix[i, j] = value
        if not seen.all():
            raise LengthMismatch("feature table is not complete over (id, feature)")
        return row_ids, col_names, matrix

    def labels_for(self, row_ids: list[str]) -> list[str] | None:
        if self.groups is None:
            return None
        g = self.group_of()
        return [g[sid] for sid in row_ids]

    def feature_column(self, name: str) -> tuple[list[str], np.ndarray]:
        mask = [i for i, n in enumerate(self.names) if n == name]
        return [self.ids[i] for i in mask], self.values[mask]

    def subset_features(self, keep: set[str]) -> "FeatureTable":
        mask = [i for i, n in enumerate(self.names) if n in keep]
        return FeatureTable(
            ids=[self.ids[i] for i in mask],
            names=[self.names[i] for i in mask],
            sets=[self.sets[i] for i in mask],
            values=self.values[mask],
            groups=None if self.groups is None else [self.groups[i] for i in mask],
        )

    # -- CSV round trip (id,names,values,method,group) ----------------------

    def to_csv_text(self) -> str:
        labeled = self.groups is not None
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(CSV_HEADER if labeled else CSV_HEADER[:4])
        for i in range(len(self.ids)):
            row = [self.ids[i], self.names[i], _fmt_value(self.values[i]), self.sets[i]]
            if labeled:
                row.append(self.groups[i])
            writer.writerow(row)
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv_text(), encoding="utf-8", newline="")

    @classmethod
    def read_csv(cls, path: str | Path) -> "FeatureTable":
        with Path(path).open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or header[:4] != CSV_HEADER[:4]:
                raise EmptyTable(f"{path}: expected header {CSV_HEADER[:4]}(,group)")
            labeled = len(header) >= 5 and header[4] == "group"
            ids, names, sets, values, groups = [], [], [], [], []
            for row in reader:
                if not row:
                    continue
                ids.append(row[0])
                names.append(row[1])
                values.append(_parse_value(row[2]))
                sets.append(row[3])
                if labeled:
                    groups.append(row[4])
        if not ids:
            raise EmptyTable(f"{path}: no feature records")
        return cls(ids, names, sets, np.array(values), groups if labeled else None)


def _fmt_value(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Inf" if v > 0 else "-Inf"
    return repr(float(v))


def _parse_value(text: str) -> float:
    if text == "NaN":
        return math.nan
    if text == "Inf":
        return math.inf
    if text == "-Inf":
        return -math.inf
    return float(text)


# ---------------------------------------------------------------------------
# extraction and quality
# ---------------------------------------------------------------------------

def extract_features(
    d: Dataset,
    registry: list[FeatureDescriptor] | None = None,
    threads: int = 1,
) -> FeatureTable:
    """Compute the catalog over every series, in parallel across series.

    Output rows are in canonical (id, name) sort order, so the result is
    bit-identical regardless of the worker count.
    """
    reg = default_registry() if registry is None else registry
    if not reg:
        raise EmptyRegistry("feature registry is empty")
    reg = sorted(reg, key=lambda f: f.name)
    row_ids = d.ids

    def one_series(sid: str) -> np.ndarray:
        x = d.series[sid]
        out = np.empty(len(reg))
        for j, desc in enumerate(reg):
            try:
                out[j] = desc.fn(x)
            except Exception:
                log.debug("feature %s failed on series %s", desc.name, sid, exc_info=True)
                out[j] = np.nan
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_series = list(pool.map(one_series, row_ids))
    else:
        per_series = [one_series(sid) for sid in row_ids]

    ids, names, sets, values = [], [], [], []
    groups: list[str] | None = [] if d.labels is not None else None
    for sid, vec in zip(row_ids, per_series):
        for desc, v in zip(reg, vec):
            ids.append(sid)
            names.append(desc.name)
            sets.append(desc.set)
            values.append(v)
            if groups is not None:
                groups.append(d.labels[sid])
    return FeatureTable(ids, names, sets, np.array(values), groups)


@dataclass(frozen=True)
class QualityRow:
    name: str
    set: str
    numeric: float
    nan: float
    pos_inf: float
    neg_inf: float


@dataclass(frozen=True)
class QualityReport:
    """Per-feature proportions of numeric / NaN / +Inf / -Inf outputs."""

    rows: list[QualityRow] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "features": [
                {
                    "name": r.name,
                    "set": r.set,
                    "numeric": r.numeric,
                    "nan": r.nan,
                    "pos_inf": r.pos_inf,
                    "neg_inf": r.neg_inf,
                }
                for r in self.rows
            ]
        }


def quality_report(ft: FeatureTable) -> QualityReport:
    """Proportion of values per feature that are numeric, NaN, or ±Inf."""
    if len(ft) == 0:
        raise EmptyTable("feature table has no records")
    set_of = ft.set_of()
    rows = []
    for name in ft.feature_names():
        _, col = ft.feature_column(name)
        n = col.size
        n_nan = int(np.sum(np.isnan(col)))
        n_pos = int(np.sum(np.isposinf(col)))
        n_neg = int(np.sum(np.isneginf(col)))
        rows.append(
            QualityRow(
                name=name,
                set=set_of[name],
                numeric=(n - n_nan - n_pos - n_neg) / n,
                nan=n_nan / n,
                pos_inf=n_pos / n,
                neg_inf=n_neg / n,
            )
        )
    return QualityReport(rows)
