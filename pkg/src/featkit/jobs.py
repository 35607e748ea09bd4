"""Analysis stages as named jobs with canonical JSON parameters.

Both the CLI and the HTTP service run stages through this table, so the two
front doors cannot drift apart: one param schema, one artifact shape, and a
stable canonical form used for content-addressed caching.
"""

from __future__ import annotations

import hashlib
import json

from .classifiers import ClassifierSpec
from .cluster import LINKAGES, cluster_matrix
from .features import FeatureTable, quality_report
from .learn import (
    CVConfig,
    NullConfig,
    TOP_FEATURE_TESTS,
    compute_top_features,
    fit_multi_feature_classifier,
)
from .normalize import NormalizationMethod
from .project import ProjectionConfig, project_table

JOB_KINDS = ("quality", "matrix", "project", "classify", "top_features")

_DEFAULTS: dict[str, dict] = {
    "quality": {},
    "matrix": {"method": "z-score", "linkage": "average"},
    "project": {
        "method": "pca",
        "normalize": "z-score",
        "perplexity": 15.0,
        "seed": 0,
        "iterations": 1000,
    },
    "classify": {
        "by_set": True,
        "classifier": "svm-linear",
        "regularization": 1.0,
        "max_epochs": 1000,
        "use_k_fold": True,
        "folds": 10,
        "balanced": True,
        "seed": 0,
        "null": None,  # None | "model-free" | "model-fits"
        "permutations": 10000,
        "p_value_method": "gaussian",
    },
    "top_features": {
        "num_features": 40,
        "test": "one-d-classifier",
        "classifier": "svm-linear",
        "regularization": 1.0,
        "max_epochs": 1000,
        "use_k_fold": True,
        "folds": 10,
        "balanced": True,
        "seed": 0,
        "null": "model-free",
        "permutations": 10000,
        "p_value_method": "gaussian",
        "cor_method": "spearman",
        "absolute": True,
    },
}


def default_params(kind: str) -> dict:
    if kind not in JOB_KINDS:
        raise ValueError(f"unknown job kind {kind!r}; choose from {JOB_KINDS}")
    return dict(_DEFAULTS[kind])


def canonical_params(kind: str, params: dict | None) -> dict:
    """Fill defaults and reject unknown keys; the result keys content hashes."""
    base = default_params(kind)
    params = params or {}
    unknown = sorted(set(params) - set(base)) if base else sorted(params)
    if unknown:
        raise ValueError(f"unknown parameter(s) for {kind}: {unknown}")
    base.update(params)
    return base


def job_key(dataset_id: str, kind: str, params: dict) -> str:
    canon = json.dumps(canonical_params(kind, params), sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(f"{dataset_id}|{kind}|{canon}".encode()).hexdigest()
    return digest[:24]


def _cv_from(params: dict) -> CVConfig:
    return CVConfig(
        use_k_fold=bool(params["use_k_fold"]),
        num_folds=int(params["folds"]),
        balanced_accuracy=bool(params["balanced"]),
        seed=int(params["seed"]),
    )


def _spec_from(params: dict, method_key: str = "classifier") -> ClassifierSpec:
    return ClassifierSpec(
        method=params[method_key],
        regularization=float(params["regularization"]),
        max_epochs=int(params["max_epochs"]),
        seed=int(params["seed"]),
    )


def _null_from(params: dict) -> NullConfig | None:
    if params["null"] in (None, "", "none"):
        return None
    method = {"model-free": "ModelFreeShuffles", "model-fits": "NullModelFits"}.get(params["null"])
    if method is None:
        raise ValueError(f"unknown null method {params['null']!r}")
    return NullConfig(
        method=method,
        num_permutations=int(params["permutations"]),
        p_value_method=params["p_value_method"],
        seed=int(params["seed"]),
    )


def run_job(kind: str, ft: FeatureTable, params: dict | None, threads: int = 1) -> dict:
    """Execute one stage over an extracted feature table; returns the artifact."""
    p = canonical_params(kind, params)

    if kind == "quality":
        return quality_report(ft).to_json_dict()

    if kind == "matrix":
        if p["linkage"] not in LINKAGES:
            raise ValueError(f"unknown linkage {p['linkage']!r}")
        cm = cluster_matrix(ft, NormalizationMethod.parse(p["method"]), p["linkage"])
        return cm.to_json_dict()

    if kind == "project":
        config = ProjectionConfig(
            method=p["method"],
            normalization=NormalizationMethod.parse(p["normalize"]),
            perplexity=float(p["perplexity"]),
            seed=int(p["seed"]),
            iterations=int(p["iterations"]),
        )
        return project_table(ft, config).to_json_dict()

    if kind == "classify":
        report = fit_multi_feature_classifier(
            ft,
            by_set=bool(p["by_set"]),
            spec=_spec_from(p),
            cv=_cv_from(p),
            null_cfg=_null_from(p),
            threads=threads,
        )
        return report.to_json_dict()

    if kind == "top_features":
        if p["test"] not in TOP_FEATURE_TESTS:
            raise ValueError(f"unknown test {p['test']!r}")
        result = compute_top_features(
            ft,
            num_features=int(p["num_features"]),
            test=p["test"],
            spec=_spec_from(p),
            cv=_cv_from(p),
            null_cfg=_null_from(p),
            cor_method=p["cor_method"],
            absolute=bool(p["absolute"]),
            threads=threads,
        )
        return result.to_json_dict()

    raise ValueError(f"unknown job kind {kind!r}")
