from __future__ import annotations

import numpy as np
import pytest

from featkit.dataset import Dataset, make_dataset
from featkit.features import FeatureTable


def build_dataset(series: dict[str, list[float]], labels: dict[str, str] | None = None) -> Dataset:
    return make_dataset({k: np.array(v, dtype=float) for k, v in series.items()}, labels)


def table_from_columns(
    columns: dict[str, list[float]],
    sets: dict[str, str] | None = None,
    groups: list[str] | None = None,
    ids: list[str] | None = None,
) -> FeatureTable:
    """Build a long-format table from dense feature columns."""
    names = sorted(columns)
    n = len(next(iter(columns.values())))
    ids = ids or [f"s{i:03d}" for i in range(n)]
    rec_ids, rec_names, rec_sets, rec_values, rec_groups = [], [], [], [], []
    for i, sid in enumerate(ids):
        for name in names:
            rec_ids.append(sid)
            rec_names.append(name)
            rec_sets.append((sets or {}).get(name, "native"))
            rec_values.append(columns[name][i])
            if groups is not None:
                rec_groups.append(groups[i])
    return FeatureTable(
        rec_ids, rec_names, rec_sets, np.array(rec_values, dtype=float),
        rec_groups if groups is not None else None,
    )


def three_class_dataset(
    n_per_class: int = 30, length: int = 200, seed: int = 7
) -> Dataset:
    """White noise vs AR(1) phi=0.8 vs sine+noise, the desk-scale study."""
    rng = np.random.default_rng(seed)
    series: dict[str, np.ndarray] = {}
    labels: dict[str, str] = {}
    for i in range(n_per_class):
        series[f"noise_{i:02d}"] = rng.normal(size=length)
        labels[f"noise_{i:02d}"] = "noise"

        ar = np.empty(length)
        ar[0] = rng.normal()
        innov = rng.normal(size=length)
        for t in range(1, length):
            ar[t] = 0.8 * ar[t - 1] + innov[t]
        series[f"ar_{i:02d}"] = ar
        labels[f"ar_{i:02d}"] = "ar1"

        phase = rng.uniform(0, 2 * np.pi)
        t = np.arange(length)
        series[f"sine_{i:02d}"] = np.sin(2 * np.pi * t / 20 + phase) + 0.3 * rng.normal(size=length)
        labels[f"sine_{i:02d}"] = "sine"
    return make_dataset(series, labels)


def blob_table(
    n_per_class: int = 50,
    informative: int = 2,
    noise: int = 3,
    separation: float = 6.0,
    seed: int = 3,
) -> FeatureTable:
    """Two Gaussian blobs as a feature table, linearly separable by design."""
    rng = np.random.default_rng(seed)
    n = 2 * n_per_class
    cols: dict[str, list[float]] = {}
    for j in range(informative):
        shift = np.repeat([0.0, separation], n_per_class)
        cols[f"inf_{j}"] = list(rng.normal(size=n) + shift)
    for j in range(noise):
        cols[f"noise_{j}"] = list(rng.normal(size=n))
    groups = ["a"] * n_per_class + ["b"] * n_per_class
    return table_from_columns(cols, groups=groups)


def noise_table(n_per_class: int = 20, n_features: int = 5, seed: int = 11) -> FeatureTable:
    rng = np.random.default_rng(seed)
    n = 2 * n_per_class
    cols = {f"f{j}": list(rng.normal(size=n)) for j in range(n_features)}
    groups = ["a"] * n_per_class + ["b"] * n_per_class
    return table_from_columns(cols, groups=groups)


@pytest.fixture
def tmp_csv(tmp_path):
    def write(name: str, text: str) -> str:
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return write
