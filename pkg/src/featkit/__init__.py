"""featkit: feature-based analysis of univariate time series.

Extracts an interpretable feature vector per series, then runs the full
downstream workflow: extraction quality, normalization, clustered heatmap
data, PCA/t-SNE embeddings, multi-feature classification with permutation
significance, and top-feature discovery — as a library, CLI, HTTP service,
and browser explorer backend.
"""

__version__ = "0.1.0"

from .classifiers import ClassifierSpec, stratified_folds
from .cluster import (
    ClusteredMatrix,
    Dendrogram,
    cluster_matrix,
    correlation_matrix,
    euclidean_distance_matrix,
    upgma,
)
from .dataset import (
    Dataset,
    export_long_csv,
    ingest_long_csv,
    ingest_long_text,
    make_dataset,
    zscore_series,
)
from .features import (
    FeatureDescriptor,
    FeatureTable,
    QualityReport,
    default_registry,
    extract_features,
    quality_report,
)
from .learn import (
    CVConfig,
    FeatureMatrix,
    NullConfig,
    compute_top_features,
    cross_validate,
    fit_multi_feature_classifier,
    model_free_shuffles,
    null_model_fits,
    preprocess_features,
)
from .normalize import NormalizationMethod, normalize_table, normalize_vector
from .project import Embedding, ProjectionConfig, pca_2d, project_table, tsne_2d
from .stats import (
    NullDistribution,
    accuracy_metrics,
    holm_bonferroni,
    p_value,
    welch_t,
    wilcoxon_rank_sum,
)

__all__ = [
    "__version__",
    "ClassifierSpec",
    "ClusteredMatrix",
    "CVConfig",
    "Dataset",
    "Dendrogram",
    "Embedding",
    "FeatureDescriptor",
    "FeatureMatrix",
    "FeatureTable",
    "NormalizationMethod",
    "NullConfig",
    "NullDistribution",
    "ProjectionConfig",
    "QualityReport",
    "accuracy_metrics",
    "cluster_matrix",
    "compute_top_features",
    "correlation_matrix",
    "cross_validate",
    "default_registry",
    "euclidean_distance_matrix",
    "export_long_csv",
    "extract_features",
    "fit_multi_feature_classifier",
    "holm_bonferroni",
    "ingest_long_csv",
    "ingest_long_text",
    "make_dataset",
    "model_free_shuffles",
    "normalize_table",
    "normalize_vector",
    "null_model_fits",
    "p_value",
    "pca_2d",
    "preprocess_features",
    "project_table",
    "quality_report",
    "stratified_folds",
    "tsne_2d",
    "upgma",
    "welch_t",
    "wilcoxon_rank_sum",
    "zscore_series",
]
