"""Multi- and single-feature classification with permutation-based inference.

The pipeline mirrors the feature-based workflow end to end: filter columns
(non-finite, constant, near-zero variance), center and scale, run stratified
k-fold cross-validation with a margin classifier, compare feature sets,
build permutation null distributions, attach (Holm-adjusted) p-values, and
rank individual features with univariate tests plus correlation and violin
data for the reporting layer.

Leakage policy: the non-finite filter is global (it is a validity check),
while the variance filters and the centering/scaling statistics are fitted
on each training fold only.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classifiers import ClassifierSpec, make_classifier, stratified_folds
from .cluster import Dendrogram, correlation_matrix, euclidean_distance_matrix, upgma
from .errors import (
    MulticlassWithTwoSampleTest,
    NoSurvivingFeatures,
    TooFewClasses,
    UnlabeledSeries,
)
from .features import FeatureTable
from .rng import item_rng
from .stats import (
    NullDistribution,
    accuracy_metrics,
    gaussian_kde,
    holm_bonferroni,
    p_value,
    welch_t,
    wilcoxon_rank_sum,
)

ALL_FEATURES = "All features"

NZV_FREQ_RATIO = 19.0
NZV_UNIQUE_FRACTION = 0.10
NZV_VARIANCE = 1e-12


@dataclass(frozen=True)
class CVConfig:
    use_k_fold: bool = True
    num_folds: int = 10
    stratified: bool = True
    balanced_accuracy: bool = True
    seed: int = 0

    @property
    def statistic(self) -> str:
        return "balanced_accuracy" if self.balanced_accuracy else "accuracy"


@dataclass(frozen=True)
class NullConfig:
    method: str = "ModelFreeShuffles"  # | "NullModelFits"
    num_permutations: int = 10000
    p_value_method: str = "gaussian"  # | "empirical"
    seed: int = 0


@dataclass(frozen=True)
class DroppedFeature:
    name: str
    reason: str  # constant | nonfinite | near_zero_variance


@dataclass
class FeatureMatrix:
    """Filtered, standardized series x feature matrix with provenance."""

    ids: list[str]
    feature_names: list[str]
    sets: list[str]
    matrix: np.ndarray
    labels: list[str]
    dropped: list[DroppedFeature]


def _column_filter_reason(col: np.ndarray) -> str | None:
    if not np.all(np.isfinite(col)):
        return "nonfinite"
    if np.all(col == col[0]):
        return "constant"
    if float(np.var(col)) < NZV_VARIANCE:
        return "near_zero_variance"
    _, counts = np.unique(col, return_counts=True)
    counts = np.sort(counts)[::-1]
    ratio = counts[0] / counts[1]
    unique_fraction = counts.size / col.size
    if ratio >= NZV_FREQ_RATIO and unique_fraction <= NZV_UNIQUE_FRACTION:
        return "near_zero_variance"
    return None


def preprocess_features(ft: FeatureTable) -> FeatureMatrix:
    """Pivot, filter and standardize a labeled feature table.

    Dropped columns are recorded with reasons; survivors are centered and
    scaled to unit sample sd.
    """
    if not ft.labeled:
        raise UnlabeledSeries("classification requires group labels")
    row_ids, col_names, matrix = ft.pivot()
    set_of = ft.set_of()
    labels = ft.labels_for(row_ids)

    dropped: list[DroppedFeature] = []
    keep: list[int] = []
    for j, name in enumerate(col_names):
        reason = _column_filter_reason(matrix[:, j])
        if reason is None:
            keep.append(j)
        else:
            dropped.append(DroppedFeature(name, reason))
    if not keep:
        raise NoSurvivingFeatures("every feature column was filtered out")

    kept = matrix[:, keep]
    standardized = (kept - kept.mean(axis=0)) / kept.std(axis=0, ddof=1)
    return FeatureMatrix(
        ids=row_ids,
        feature_names=[col_names[j] for j in keep],
        sets=[set_of[col_names[j]] for j in keep],
        matrix=standardized,
        labels=labels,
        dropped=dropped,
    )


def _nonfinite_filtered(ft: FeatureTable) -> tuple[list[str], list[str], np.ndarray, list[str]]:
    """Raw pivot with globally non-finite columns removed."""
    row_ids, col_names, matrix = ft.pivot()
    finite = np.all(np.isfinite(matrix), axis=0)
    return (
        row_ids,
        [c for c, ok in zip(col_names, finite) if ok],
        matrix[:, finite],
        ft.labels_for(row_ids),
    )


def _fold_prepare(train: np.ndarray, test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-fold variance filters and standardization, fitted on train only."""
    keep = []
    for j in range(train.shape[1]):
        col = train[:, j]
        if np.all(col == col[0]) or float(np.var(col)) < NZV_VARIANCE:
            continue
        _, counts = np.unique(col, return_counts=True)
        counts = np.sort(counts)[::-1]
        if counts.size > 1 and counts[0] / counts[1] >= NZV_FREQ_RATIO \
                and counts.size / col.size <= NZV_UNIQUE_FRACTION:
            continue
        keep.append(j)
    if not keep:
        raise NoSurvivingFeatures("no feature survived the training-fold filters")
    mu = train[:, keep].mean(axis=0)
    sd = train[:, keep].std(axis=0, ddof=1)
    return (train[:, keep] - mu) / sd, (test[:, keep] - mu) / sd


def cross_validate(
    matrix: np.ndarray,
    labels: list[str],
    spec: ClassifierSpec,
    cv: CVConfig,
) -> list[tuple[float, float]]:
    """Per-fold (accuracy, balanced accuracy) for one feature matrix.

    ``use_k_fold=False`` evaluates by resubstitution: one pseudo-fold
    trained and scored on all rows.
    """
    labels = list(labels)
    if len(set(labels)) < 2:
        raise TooFewClasses("need at least 2 classes")
    if cv.use_k_fold:
        folds = stratified_folds(labels, cv.num_folds, cv.seed)
    else:
        folds = [np.arange(len(labels))]

    results = []
    for fold in folds:
        test_idx = fold
        if cv.use_k_fold:
            mask = np.ones(len(labels), dtype=bool)
            mask[test_idx] = False
            train_idx = np.flatnonzero(mask)
        else:
            train_idx = test_idx
        train_x, test_x = _fold_prepare(matrix[train_idx], matrix[test_idx])
        train_y = [labels[i] for i in train_idx]
        test_y = [labels[i] for i in test_idx]
        model = make_classifier(spec).fit(train_x, train_y)
        pred = model.predict(test_x)
        results.append(accuracy_metrics(test_y, pred))
    return results


def _fold_means(fold_stats: list[tuple[float, float]], cv: CVConfig) -> tuple[float, float, list[float]]:
    vals = [b if cv.balanced_accuracy else a for a, b in fold_stats]
    mean = float(np.mean(vals))
    sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
    return mean, sd, vals


def model_free_shuffles(
    labels: list[str],
    num_permutations: int,
    metric: str = "accuracy",
    seed: int = 0,
) -> NullDistribution:
    """Null statistics from scoring shuffled label vectors against the truth.

    No model is refit; each permutation draws from its own seeded stream so
    the distribution is identical however the work is scheduled.
    """
    truth = np.asarray(labels)
    values = np.empty(num_permutations)
    for i in range(num_permutations):
        shuffled = item_rng(seed, i).permutation(truth)
        acc, bal = accuracy_metrics(truth, shuffled)
        values[i] = bal if metric == "balanced_accuracy" else acc
    return NullDistribution(values, "ModelFreeShuffles", num_permutations, seed)


def null_model_fits(
    ft: FeatureTable,
    spec: ClassifierSpec,
    cv: CVConfig,
    num_permutations: int,
    seed: int = 0,
    threads: int = 1,
) -> NullDistribution:
    """Null statistics from refitting the full CV pipeline on shuffled labels.

    Fold assignments are re-drawn per permutation from the permutation's own
    stream.
    """
    _, _, matrix, labels = _nonfinite_filtered(ft)
    truth = np.asarray(labels)

    def one(i: int) -> float:
        rng = item_rng(seed, i)
        shuffled = list(rng.permutation(truth))
        fold_seed = int(rng.integers(0, 2**62))
        stats = cross_validate(matrix, shuffled, spec, _with_seed(cv, fold_seed))
        return _fold_means(stats, cv)[0]

    values = np.array(_parallel_map(one, range(num_permutations), threads))
    return NullDistribution(values, "NullModelFits", num_permutations, seed)


def _with_seed(cv: CVConfig, seed: int) -> CVConfig:
    return CVConfig(cv.use_k_fold, cv.num_folds, cv.stratified, cv.balanced_accuracy, seed)


def _parallel_map(fn, items, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class SetResult:
    set_name: str
    mean: float
    sd: float
    fold_statistics: list[float]
    feature_count: int
    p_value: float | None = None
    p_value_adjusted: float | None = None
    p_value_method: str | None = None

    def to_json_dict(self) -> dict:
        out = {
            "set": self.set_name,
            "mean": self.mean,
            "sd": self.sd,
            "fold_statistics": self.fold_statistics,
            "feature_count": self.feature_count,
        }
        if self.p_value is not None:
            out["p_value"] = self.p_value
            out["p_value_adjusted"] = self.p_value_adjusted
            out["p_value_method"] = self.p_value_method
        return out


@dataclass
class ClassificationReport:
    statistic: str
    rows: list[SetResult]
    null: NullDistribution | None = None

    def to_json_dict(self) -> dict:
        out = {
            "statistic": self.statistic,
            "rows": [r.to_json_dict() for r in self.rows],
        }
        if self.null is not None:
            out["null"] = self.null.to_json_dict()
        return out


def fit_multi_feature_classifier(
    ft: FeatureTable,
    by_set: bool = True,
    spec: ClassifierSpec = ClassifierSpec(),
    cv: CVConfig = CVConfig(),
    null_cfg: NullConfig | None = None,
    threads: int = 1,
) -> ClassificationReport:
    """Evaluate the multi-feature classifier, optionally per feature set.

    Every evaluated unit (each set tag plus "All features") shares the same
    fold assignment. With a null configuration, p-values are attached per
    row and Holm-Bonferroni adjusted across rows.
    """
    full = preprocess_features(ft)  # validates labels, provides counts
    row_ids, col_names, matrix, labels = _nonfinite_filtered(ft)
    set_of = ft.set_of()

    counts_by_set: dict[str, int] = {}
    for name in full.feature_names:
        counts_by_set[set_of[name]] = counts_by_set.get(set_of[name], 0) + 1

    units: list[tuple[str, list[int], int]] = []
    if by_set:
        for tag in sorted(set(set_of.values())):
            cols = [j for j, name in enumerate(col_names) if set_of[name] == tag]
            if cols:
                units.append((tag, cols, counts_by_set.get(tag, 0)))
    units.append((ALL_FEATURES, list(range(len(col_names))), len(full.feature_names)))

    def evaluate(unit):
        tag, cols, count = unit
        stats = cross_validate(matrix[:, cols], labels, spec, cv)
        mean, sd, vals = _fold_means(stats, cv)
        return SetResult(tag, mean, sd, vals, count)

    rows = _parallel_map(evaluate, units, threads)

    shared_null: NullDistribution | None = None
    if null_cfg is not None:
        if null_cfg.method == "ModelFreeShuffles":
            shared_null = model_free_shuffles(
                labels, null_cfg.num_permutations, cv.statistic, null_cfg.seed
            )
        for row, unit in zip(rows, units):
            if null_cfg.method == "ModelFreeShuffles":
                null = shared_null
            else:
                null = null_model_fits(
                    ft.subset_features({n for n in col_names if set_of[n] == unit[0]})
                    if unit[0] != ALL_FEATURES
                    else ft,
                    spec,
                    cv,
                    null_cfg.num_permutations,
                    null_cfg.seed,
                    threads,
                )
            row.p_value = p_value(row.mean, null, null_cfg.p_value_method)
            row.p_value_method = null_cfg.p_value_method
        adjusted = holm_bonferroni([r.p_value for r in rows])
        for row, adj in zip(rows, adjusted):
            row.p_value_adjusted = float(adj)

    rows.sort(key=lambda r: (-r.mean, r.set_name))
    return ClassificationReport(cv.statistic, rows, shared_null)


# ---------------------------------------------------------------------------
# top individual features
# ---------------------------------------------------------------------------

VIOLIN_POINTS = 128


@dataclass
class TopFeatureRow:
    feature: str
    set: str
    statistic: float
    p_value: float
    adjusted_p: float

    def to_json_dict(self) -> dict:
        return {
            "feature": self.feature,
            "set": self.set,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "adjusted_p": self.adjusted_p,
        }


@dataclass
class ViolinData:
    feature: str
    classes: list[dict]  # {group, points, density_x, density_y}


@dataclass
class TopFeatureResult:
    test: str
    rows: list[TopFeatureRow]
    correlation_names: list[str]
    correlation_values: np.ndarray
    correlation_order: list[int]
    correlation_dendrogram: Dendrogram
    correlation_kind: str
    correlation_absolute: bool
    violins: list[ViolinData]

    def to_json_dict(self) -> dict:
        return {
            "test": self.test,
            "rows": [r.to_json_dict() for r in self.rows],
            "correlation": {
                "names": self.correlation_names,
                "values": [[float(v) for v in row] for row in self.correlation_values],
                "order": [int(i) for i in self.correlation_order],
                "merges": self.correlation_dendrogram.merges_json(),
                "kind": self.correlation_kind,
                "absolute": self.correlation_absolute,
            },
            "violins": [
                {"feature": v.feature, "classes": v.classes} for v in self.violins
            ],
        }


TOP_FEATURE_TESTS = ("one-d-classifier", "t-test", "wilcoxon", "binomial-logistic")


def compute_top_features(
    ft: FeatureTable,
    num_features: int = 40,
    test: str = "one-d-classifier",
    spec: ClassifierSpec = ClassifierSpec(),
    cv: CVConfig = CVConfig(),
    null_cfg: NullConfig | None = None,
    cor_method: str = "spearman",
    absolute: bool = True,
    threads: int = 1,
) -> TopFeatureResult:
    """Rank features by univariate class-separation strength.

    Two-sample tests (t-test, wilcoxon, binomial-logistic) require exactly
    two classes; the one-dimensional classifier works for any class count.
    Returns the ranked table, the clustered correlation submatrix of the
    top features, and per-class violin densities.
    """
    if test not in TOP_FEATURE_TESTS:
        raise ValueError(f"unknown test {test!r}; choose from {TOP_FEATURE_TESTS}")
    full = preprocess_features(ft)
    labels = full.labels
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise TooFewClasses("need at least 2 classes")
    if test in ("t-test", "wilcoxon", "binomial-logistic") and len(classes) != 2:
        raise MulticlassWithTwoSampleTest(f"{test} requires exactly 2 classes, got {len(classes)}")

    # raw (unstandardized) columns of the surviving features, for the
    # univariate statistics and the violins
    row_ids, col_names, matrix, _ = _nonfinite_filtered(ft)
    col_idx = {name: j for j, name in enumerate(col_names)}
    raw = {name: matrix[:, col_idx[name]] for name in full.feature_names}
    y = np.asarray(labels)

    needs_null = test in ("one-d-classifier", "binomial-logistic")
    cfg = null_cfg or NullConfig()
    shared_null = (
        model_free_shuffles(labels, cfg.num_permutations, cv.statistic, cfg.seed)
        if needs_null
        else None
    )

    def score(name: str) -> tuple[float, float]:
        col = raw[name]
        if test == "t-test":
            t, _, p = welch_t(col[y == classes[0]], col[y == classes[1]])
            return t, p
        if test == "wilcoxon":
            return wilcoxon_rank_sum(col[y == classes[0]], col[y == classes[1]])
        one_d_spec = spec if test == "one-d-classifier" else ClassifierSpec(
            "binomial-logistic", spec.regularization, spec.max_epochs, spec.seed
        )
        stats = cross_validate(col[:, None], labels, one_d_spec, cv)
        mean, _, _ = _fold_means(stats, cv)
        return mean, p_value(mean, shared_null, cfg.p_value_method)

    scored = _parallel_map(score, full.feature_names, threads)
    adjusted = holm_bonferroni([p for _, p in scored])
    set_of = ft.set_of()
    rows = [
        TopFeatureRow(name, set_of[name], float(stat), float(p), float(adj))
        for name, (stat, p), adj in zip(full.feature_names, scored, adjusted)
    ]
    rows.sort(key=lambda r: (r.p_value, -r.statistic, r.feature))
    top = rows[: max(1, num_features)]

    top_names = [r.feature for r in top]
    cols = np.column_stack([raw[name] for name in top_names])
    corr = correlation_matrix(cols, kind=cor_method, absolute=absolute)
    if len(top_names) >= 2:
        dend = upgma(euclidean_distance_matrix(corr))
        order = dend.leaf_order
    else:
        dend = Dendrogram(1, [], [0])
        order = [0]

    violins = []
    for name in top_names:
        col = raw[name]
        grid = np.linspace(float(col.min()), float(col.max()), VIOLIN_POINTS)
        per_class = []
        for cls in classes:
            pts = col[y == cls]
            dens = gaussian_kde(pts, grid)
            per_class.append(
                {
                    "group": cls,
                    "points": [float(v) for v in pts],
                    "density_x": [float(v) for v in grid],
                    "density_y": [float(v) for v in dens],
                }
            )
        violins.append(ViolinData(name, per_class))

    return TopFeatureResult(
        test=test,
        rows=top,
        correlation_names=top_names,
        correlation_values=corr,
        correlation_order=order,
        correlation_dendrogram=dend,
        correlation_kind=cor_method,
        correlation_absolute=absolute,
        violins=violins,
    )
