"""Univariate tests, multiple-comparison correction and null-model p-values."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr

from .cluster import average_ranks
from .errors import DegenerateNull, EmptyInput, LengthMismatch, OutOfRange

EXACT_WILCOXON_MAX = 8


def normal_sf(z: float) -> float:
    """Upper tail of the standard normal distribution."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def welch_t(a: np.ndarray, b: np.ndarray) -> tuple[float, float, float]:
    """Welch's unequal-variance t-test.

    Returns (t statistic, Welch-Satterthwaite degrees of freedom, two-sided
    p-value). The t tail probability comes from the Student-t CDF.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise EmptyInput("welch_t needs at least 2 values per group")
    va = float(np.var(a, ddof=1)) / a.size
    vb = float(np.var(b, ddof=1)) / b.size
    if va + vb == 0.0:
        raise DegenerateNull("both groups are constant")
    t = (float(np.mean(a)) - float(np.mean(b))) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    p = 2.0 * float(stdtr(df, -abs(t)))
    return t, df, p


def _rank_sum(values: np.ndarray, first_n: int) -> float:
    ranks = average_ranks(values)
    return float(np.sum(ranks[:first_n]))


def wilcoxon_rank_sum(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Two-sided Wilcoxon rank-sum test; returns (W of the first group, p).

    Classes with at most 8 members each get an exact p-value by enumerating
    every assignment of the pooled ranks; larger classes use the normal
    approximation with tie-corrected variance."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise EmptyInput("wilcoxon_rank_sum needs non-empty groups")
    na, nb = a.size, b.size
    pooled = np.concatenate([a, b])
    w = _rank_sum(pooled, na)
    mean_w = na * (na + nb + 1) / 2.0

    if na <= EXACT_WILCOXON_MAX and nb <= EXACT_WILCOXON_MAX:
        # ranks are integers or half-integers, so sums and deviations are
        # exact in binary floating point; no tolerance needed
        ranks = average_ranks(pooled)
        obs_dev = abs(w - mean_w)
        hits = total = 0
        for combo in itertools.combinations(range(na + nb), na):
            total += 1
            if abs(float(ranks[list(combo)].sum()) - mean_w) >= obs_dev:
                hits += 1
        return w, hits / total

    # tie-corrected normal approximation
    n = na + nb
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(counts**3 - counts)) / (n * (n - 1))
    var_w = na * nb / 12.0 * (n + 1 - tie_term)
    if var_w <= 0.0:
        raise DegenerateNull("all pooled values identical")
    z = (w - mean_w) / math.sqrt(var_w)
    return w, 2.0 * normal_sf(abs(z))


def holm_bonferroni(p_values) -> np.ndarray:
    """Step-down Holm-Bonferroni adjustment, clipped at 1."""
    p = np.asarray(p_values, dtype=np.float64)
    if p.size == 0:
        raise EmptyInput("no p-values to adjust")
    if np.any(p < 0) or np.any(p > 1) or np.any(np.isnan(p)):
        raise OutOfRange("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(m)
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, (m - rank) * p[idx])
        adjusted[idx] = min(1.0, running)
    return adjusted


@dataclass(frozen=True)
class NullDistribution:
    """Null performance statistics plus generation metadata."""

    values: np.ndarray
    method: str  # "ModelFreeShuffles" | "NullModelFits"
    num_permutations: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "num_permutations": self.num_permutations,
            "seed": self.seed,
            "mean": float(np.mean(self.values)),
            "sd": float(np.std(self.values, ddof=1)) if self.values.size > 1 else 0.0,
        }


def p_value(observed: float, null: NullDistribution, method: str = "gaussian") -> float:
    """Probability of the observed statistic under the null distribution.

    ``gaussian`` evaluates the upper tail of a normal fitted to the null;
    ``empirical`` is the proportion of null values >= the observed one.
    """
    values = np.asarray(null.values, dtype=np.float64)
    if values.size == 0:
        raise DegenerateNull("empty null distribution")
    if method == "empirical":
        return float(np.mean(values >= observed))
    if method == "gaussian":
        sd = float(np.std(values, ddof=1))
        if sd == 0.0:
            raise DegenerateNull("null distribution has zero variance")
        return normal_sf((observed - float(np.mean(values))) / sd)
    raise ValueError(f"unknown p-value method {method!r}")


def silverman_bandwidth(values: np.ndarray) -> float:
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    q25, q75 = np.quantile(values, [0.25, 0.75])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    h = 0.9 * spread * values.size ** (-0.2)
    if h <= 0.0:
        # within-class constant: keep the density drawable
        h = 1e-3 * max(1.0, abs(float(np.median(values))))
    return h


def gaussian_kde(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Gaussian kernel density estimate with Silverman's bandwidth."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise EmptyInput("cannot estimate a density from no points")
    h = silverman_bandwidth(values)
    z = (grid[:, None] - values[None, :]) / h
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (values.size * h * math.sqrt(2 * math.pi))
    return dens


def accuracy_metrics(y_true, y_pred) -> tuple[float, float]:
    """(plain accuracy, balanced accuracy = unweighted mean per-class recall)."""
    y_true = list(y_true)
    y_pred = list(y_pred)
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    if not y_true:
        raise EmptyInput("no labels")
    correct = sum(1 for t, p in zip(y_true, y_pred) if t == p)
    recalls = []
    for cls in sorted(set(y_true)):
        idx = [i for i, t in enumerate(y_true) if t == cls]
        recalls.append(sum(1 for i in idx if y_pred[i] == cls) / len(idx))
    return correct / len(y_true), sum(recalls) / len(recalls)
