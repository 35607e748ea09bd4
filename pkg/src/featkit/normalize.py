"""Feature rescaling: z-score, min-max, sigmoid and outlier-robust sigmoid.

All four maps are strictly increasing where defined and every one of them
ends with a linear rescale to the unit interval, so surviving columns attain
both 0 and 1. Statistics are computed over finite entries only; non-finite
inputs come back as NaN.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DegenerateScale
from .features import FeatureTable


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # saturation to exactly 0/1 for extreme arguments is the intended limit
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


class NormalizationMethod(enum.Enum):
    ZSCORE = "z-score"
    MINMAX = "MinMax"
    SIGMOID = "Sigmoid"
    ROBUST_SIGMOID = "RobustSigmoid"

    @classmethod
    def parse(cls, text: str) -> "NormalizationMethod":
        for method in cls:
            if method.value.lower() == text.lower():
                return method
        raise ValueError(f"unknown normalization method {text!r}; choose from "
                         f"{[m.value for m in cls]}")


def normalize_vector(x, method: NormalizationMethod, rescale: bool = True) -> np.ndarray:
    """Rescale one feature vector to [0, 1].

    Raises DegenerateScale when the method's denominator vanishes (sd = 0,
    max = min, or IQR = 0) or when fewer than 2 finite entries exist; the
    caller decides whether to drop the column.

    ``rescale=False`` skips the final stretch to the unit interval and
    returns the method's core transform — useful when the sigmoid outputs
    themselves are of interest (the robust sigmoid core is what ignores
    outliers; the final stretch is necessarily max-sensitive).
    """
    x = np.asarray(x, dtype=np.float64)
    finite = np.isfinite(x)
    vals = x[finite]
    if vals.size < 2:
        raise DegenerateScale("need at least 2 finite entries to normalize")

    if method is NormalizationMethod.ZSCORE:
        sd = float(np.std(vals, ddof=1))
        if sd == 0.0:
            raise DegenerateScale("zero standard deviation")
        scaled = (vals - float(np.mean(vals))) / sd
    elif method is NormalizationMethod.MINMAX:
        lo, hi = float(np.min(vals)), float(np.max(vals))
        if hi == lo:
            raise DegenerateScale("max equals min")
        scaled = (vals - lo) / (hi - lo)
    elif method is NormalizationMethod.SIGMOID:
        sd = float(np.std(vals, ddof=1))
        if sd == 0.0:
            raise DegenerateScale("zero standard deviation")
        scaled = _sigmoid((vals - float(np.mean(vals))) / sd)
    elif method is NormalizationMethod.ROBUST_SIGMOID:
        q25, q75 = np.quantile(vals, [0.25, 0.75])
        iqr = float(q75 - q25)
        if iqr == 0.0:
            raise DegenerateScale("zero interquartile range")
        med = float(np.median(vals))
        scaled = _sigmoid((vals - med) / (iqr / 1.35))
    else:  # pragma: no cover
        raise ValueError(f"unhandled method {method}")

    if rescale:
        # final linear rescale to the unit interval (a no-op for MinMax)
        lo, hi = float(np.min(scaled)), float(np.max(scaled))
        if hi == lo:
            raise DegenerateScale("transform collapsed to a single value")
        scaled = (scaled - lo) / (hi - lo)

    out = np.full_like(x, np.nan)
    out[finite] = scaled
    return out


def normalize_matrix(
    matrix: np.ndarray, method: NormalizationMethod
) -> tuple[np.ndarray, list[int], list[int]]:
    """Normalize each column independently; returns (matrix of kept columns,
    kept column indices, dropped column indices)."""
    kept_cols, kept_idx, dropped_idx = [], [], []
    for j in range(matrix.shape[1]):
        try:
            kept_cols.append(normalize_vector(matrix[:, j], method))
            kept_idx.append(j)
        except DegenerateScale:
            dropped_idx.append(j)
    out = np.column_stack(kept_cols) if kept_cols else np.empty((matrix.shape[0], 0))
    return out, kept_idx, dropped_idx


def normalize_table(
    ft: FeatureTable, method: NormalizationMethod
) -> tuple[FeatureTable, list[str]]:
    """Normalize every feature column of a long-format table.

    Columns raising DegenerateScale are dropped; their names come back in
    the second element so callers can report them.
    """
    names = ft.feature_names()
    normalized: dict[str, dict[str, float]] = {}
    dropped: list[str] = []
    for name in names:
        ids, col = ft.feature_column(name)
        try:
            scaled = normalize_vector(col, method)
        except DegenerateScale:
            dropped.append(name)
            continue
        normalized[name] = dict(zip(ids, scaled))

    keep = set(normalized)
    mask = [i for i, n in enumerate(ft.names) if n in keep]
    values = np.array([normalized[ft.names[i]][ft.ids[i]] for i in mask])
    out = FeatureTable(
        ids=[ft.ids[i] for i in mask],
        names=[ft.names[i] for i in mask],
        sets=[ft.sets[i] for i in mask],
        values=values,
        groups=None if ft.groups is None else [ft.groups[i] for i in mask],
    )
    return out, dropped
