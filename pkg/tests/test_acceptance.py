"""Acceptance suite: one test per primary criterion, each printing a
PASS/FAIL line and enforcing its runtime budget (run with ``pytest -s``
to watch the lines appear live)."""

from __future__ import annotations

import hashlib
import json
import math
import threading
import time
import urllib.request

import numpy as np
import pytest

import oracles as o
from conftest import three_class_dataset
from featkit.classifiers import ClassifierSpec
from featkit.cli import main as cli_main
from featkit.cluster import correlation_matrix, euclidean_distance_matrix, upgma
from featkit.dataset import zscore_series
from featkit.errors import DegenerateScale
from featkit.features import FeatureTable, default_registry, extract_features
from featkit.learn import (
    CVConfig,
    NullConfig,
    compute_top_features,
    fit_multi_feature_classifier,
    model_free_shuffles,
)
from featkit.normalize import NormalizationMethod, normalize_table, normalize_vector
from featkit.project import ProjectionConfig, conditional_neighbor_probabilities, pca_2d, tsne_2d
from featkit.stats import accuracy_metrics, holm_bonferroni, welch_t, wilcoxon_rank_sum


class criterion:
    """Context manager asserting a runtime budget and printing the verdict."""

    def __init__(self, name: str, budget_seconds: float):
        self.name = name
        self.budget = budget_seconds

    def __enter__(self):
        self.started = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.started
        verdict = "PASS" if exc_type is None and elapsed < self.budget else "FAIL"
        print(f"[acceptance] {verdict} {self.name} ({elapsed:.2f}s / budget {self.budget:.0f}s)")
        if exc_type is None:
            assert elapsed < self.budget, (
                f"{self.name}: runtime {elapsed:.2f}s exceeds budget {self.budget}s"
            )
        return False


# -- 1. chance-level anchor ----------------------------------------------------

def test_criterion_chance_level_anchor():
    with criterion("chance-level anchor (model-free shuffles)", 5.0):
        five = [f"c{k}" for k in range(5) for _ in range(20)]
        null5 = model_free_shuffles(five, 10000, metric="accuracy", seed=101)
        se5 = float(np.std(null5.values, ddof=1)) / math.sqrt(10000)
        assert abs(float(np.mean(null5.values)) - 0.20) <= 3 * se5

        two = ["a"] * 50 + ["b"] * 50
        null2 = model_free_shuffles(two, 10000, metric="accuracy", seed=102)
        se2 = float(np.std(null2.values, ddof=1)) / math.sqrt(10000)
        assert abs(float(np.mean(null2.values)) - 0.50) <= 3 * se2


# -- 2. normalization suite ------------------------------------------------------

def test_criterion_normalization_suite():
    with criterion("normalization suite", 1.0):
        rng = np.random.default_rng(7)
        for method in NormalizationMethod:
            for _ in range(25):
                x = rng.normal(size=20) * rng.uniform(0.5, 50)
                out = normalize_vector(x, method)
                assert float(out.min()) == 0.0 and float(out.max()) == 1.0
                assert np.all((out >= 0.0) & (out <= 1.0))
                assert np.array_equal(np.argsort(x), np.argsort(out))

        sigmoid = normalize_vector([1.0, 2.0, 3.0], NormalizationMethod.SIGMOID)
        assert np.allclose(sigmoid, [0.0, 0.5, 1.0], atol=1e-12)

        # outlier contrast, asserted on the robust sigmoid core: the final
        # unit stretch is max-sensitive by construction, the core is not
        x = np.arange(10, dtype=float)
        spiked = x.copy()
        spiked[9] = 1e6
        rb = normalize_vector(x, NormalizationMethod.ROBUST_SIGMOID, rescale=False)
        rs = normalize_vector(spiked, NormalizationMethod.ROBUST_SIGMOID, rescale=False)
        assert float(np.max(np.abs(rb[:9] - rs[:9]))) < 0.05
        mm = normalize_vector(spiked, NormalizationMethod.MINMAX)
        assert float(np.max(mm[:9])) < 1e-4

        for method in NormalizationMethod:
            with pytest.raises(DegenerateScale):
                normalize_vector([4.0, 4.0, 4.0, 4.0], method)


# -- 3. oracle equivalence -------------------------------------------------------

KERNEL_ORACLES = {
    "mean": o.o_mean, "stddev": o.o_stddev, "skewness": o.o_skewness,
    "kurtosis_excess": o.o_kurtosis_excess, "median": o.o_median, "iqr": o.o_iqr,
    "min": min, "max": max, "mad": o.o_mad,
    "acf_lag_1": lambda xs: o.o_acf(xs, 1), "acf_lag_2": lambda xs: o.o_acf(xs, 2),
    "acf_lag_3": lambda xs: o.o_acf(xs, 3), "acf_lag_5": lambda xs: o.o_acf(xs, 5),
    "acf_lag_10": lambda xs: o.o_acf(xs, 10), "acf_first_zero": o.o_acf_first_zero,
    "acf_sumsq_10": lambda xs: sum(o.o_acf(xs, k) ** 2 for k in range(1, 11)),
    "spectral_entropy": o.o_spectral_entropy, "spectral_centroid": o.o_spectral_centroid,
    "crossing_points": o.o_crossings, "longest_stretch_above_mean": o.o_longest_stretch,
    "trend_slope": lambda xs: o.o_trend(xs)[0], "trend_r2": lambda xs: o.o_trend(xs)[1],
    "stability": o.o_stability, "lumpiness": o.o_lumpiness,
}


def test_criterion_oracle_equivalence():
    with criterion("oracle equivalence (kernels, distances, UPGMA, correlation, "
                   "tests, Holm, accuracy)", 60.0):
        rng = np.random.default_rng(1234)
        registry = {d.name: d for d in default_registry()}

        for _ in range(100):
            x = rng.normal(scale=rng.uniform(0.5, 4.0), size=int(rng.integers(21, 65)))
            xs = [float(v) for v in x]
            for name, oracle in KERNEL_ORACLES.items():
                assert registry[name].fn(x) == pytest.approx(oracle(xs), abs=1e-9)

        for _ in range(100):
            rows = rng.normal(size=(5, 4))
            d = euclidean_distance_matrix(rows)
            for i in range(5):
                for j in range(5):
                    assert d[i, j] == pytest.approx(
                        o.o_euclidean(list(rows[i]), list(rows[j])), abs=1e-12
                    )

        for _ in range(100):
            n = int(rng.integers(3, 9))
            d = euclidean_distance_matrix(rng.normal(size=(n, 3)))
            got = upgma(d).merges
            want = o.o_upgma([[float(v) for v in row] for row in d])
            for (a, b, h), (wa, wb, wh) in zip(got, want):
                assert {a, b} == {wa, wb}
                assert h == pytest.approx(wh, abs=1e-10)

        for _ in range(100):
            u = rng.normal(size=10)
            v = rng.normal(size=10)
            cols = np.column_stack([u, v])
            assert correlation_matrix(cols, "pearson")[0, 1] == pytest.approx(
                o.o_pearson(list(u), list(v)), abs=1e-12
            )
            assert correlation_matrix(cols, "spearman")[0, 1] == pytest.approx(
                o.o_spearman(list(u), list(v)), abs=1e-12
            )

        for _ in range(100):
            a = rng.normal(size=int(rng.integers(3, 15)))
            b = rng.normal(loc=0.5, size=int(rng.integers(3, 15)))
            t, df, _ = welch_t(a, b)
            wt, wdf = o.o_welch(list(a), list(b))
            assert t == pytest.approx(wt, abs=1e-10)
            assert df == pytest.approx(wdf, abs=1e-10)

        for _ in range(100):
            a = rng.normal(size=int(rng.integers(3, 9)))
            b = rng.normal(loc=rng.uniform(0, 1), size=int(rng.integers(3, 9)))
            _, p = wilcoxon_rank_sum(a, b)
            assert p == pytest.approx(o.o_wilcoxon_exact_p(list(a), list(b)), abs=1e-12)

        for _ in range(100):
            ps = rng.uniform(size=int(rng.integers(1, 10)))
            assert np.allclose(holm_bonferroni(ps), o.o_holm(list(ps)), atol=1e-12)

        labels = ["a", "b", "c"]
        for _ in range(100):
            n = int(rng.integers(3, 30))
            y_true = [labels[i] for i in rng.integers(0, 3, size=n)]
            y_pred = [labels[i] for i in rng.integers(0, 3, size=n)]
            acc, bal = accuracy_metrics(y_true, y_pred)
            assert acc == pytest.approx(o.o_accuracy(y_true, y_pred), abs=1e-12)
            assert bal == pytest.approx(o.o_balanced_accuracy(y_true, y_pred), abs=1e-12)


# -- 4. classifier sanity ---------------------------------------------------------

def _table_from_arrays(cols: dict[str, np.ndarray], groups: list[str]) -> FeatureTable:
    names = sorted(cols)
    n = len(groups)
    return FeatureTable(
        ids=[f"s{i:03d}" for i in range(n) for _ in names],
        names=[name for _ in range(n) for name in names],
        sets=["native" for _ in range(n) for _ in names],
        values=np.array([float(cols[name][i]) for i in range(n) for name in names]),
        groups=[groups[i] for i in range(n) for _ in names],
    )


def test_criterion_classifier_sanity():
    with criterion("classifier sanity (blobs, noise calibration, significance)", 120.0):
        rng = np.random.default_rng(55)
        n_per = 50
        groups = ["a"] * n_per + ["b"] * n_per
        shift = np.repeat([0.0, 6.0], n_per)
        cols = {
            "inf_0": rng.normal(size=2 * n_per) + shift,
            "inf_1": rng.normal(size=2 * n_per) + shift,
            "noise_0": rng.normal(size=2 * n_per),
        }
        blob_ft = _table_from_arrays(cols, groups)
        report = fit_multi_feature_classifier(
            blob_ft, by_set=False, cv=CVConfig(num_folds=10, seed=5),
            null_cfg=NullConfig(num_permutations=3000, seed=6),
        )
        assert report.rows[0].mean >= 0.95
        assert report.rows[0].p_value < 0.001

        # one pure-noise dataset, 20 seeded reruns of the analysis: gaussian p
        # should exceed 0.05 in >= 90% of them
        nrng = np.random.default_rng(424242)
        noise_groups = ["a"] * 20 + ["b"] * 20
        noise_cols = {f"f{j}": nrng.normal(size=40) for j in range(5)}
        noise_ft = _table_from_arrays(noise_cols, noise_groups)
        clear = 0
        for rerun in range(20):
            noise_report = fit_multi_feature_classifier(
                noise_ft, by_set=False, cv=CVConfig(num_folds=4, seed=rerun),
                null_cfg=NullConfig(num_permutations=1000, seed=rerun),
            )
            if noise_report.rows[0].p_value > 0.05:
                clear += 1
        assert clear >= 18, f"only {clear}/20 noise reruns had p > 0.05"


# -- 5. end-to-end desk-scale study ------------------------------------------------

def test_criterion_end_to_end_desk_study():
    with criterion("end-to-end desk study (wn vs AR(1) vs sine)", 300.0):
        d = zscore_series(three_class_dataset(n_per_class=30, length=200, seed=77))
        ft = extract_features(d, threads=2)

        normalized, dropped = normalize_table(ft, NormalizationMethod.ZSCORE)

        report = fit_multi_feature_classifier(
            normalized, by_set=True, cv=CVConfig(num_folds=10, seed=3),
        )
        by_name = {r.set_name: r for r in report.rows}
        assert by_name["All features"].mean >= 0.90

        # duplicate one autocorrelation feature under a second set tag
        ids, vals = normalized.feature_column("acf_lag_1")
        groups_of = normalized.group_of()
        dup = FeatureTable(
            ids=normalized.ids + ids,
            names=normalized.names + ["acf_lag_1_dup"] * len(ids),
            sets=normalized.sets + ["native_dup"] * len(ids),
            values=np.concatenate([normalized.values, vals]),
            groups=normalized.groups + [groups_of[i] for i in ids],
        )
        top = compute_top_features(
            dup, num_features=15, test="one-d-classifier",
            spec=ClassifierSpec(seed=2), cv=CVConfig(num_folds=10, seed=3),
            null_cfg=NullConfig(num_permutations=10000, seed=4),
        )
        top10 = [r.feature for r in top.rows[:10]]
        acf_family = [f for f in top10 if f.startswith("acf_")]
        assert len(acf_family) >= 3, f"acf family underrepresented: {top10}"

        names = top.correlation_names
        assert "acf_lag_1" in names and "acf_lag_1_dup" in names
        i, j = names.index("acf_lag_1"), names.index("acf_lag_1_dup")
        assert top.correlation_values[i, j] == pytest.approx(1.0, abs=1e-12)
        order = top.correlation_order
        assert abs(order.index(i) - order.index(j)) == 1


# -- 6. t-SNE calibration and PCA anchor --------------------------------------------

def test_criterion_tsne_calibration_and_pca():
    with criterion("t-SNE calibration + PCA rank-1 anchor", 120.0):
        rng = np.random.default_rng(31)
        data = rng.normal(size=(60, 8))
        d2 = euclidean_distance_matrix(data) ** 2
        perplexity = 12.0
        p = conditional_neighbor_probabilities(d2, perplexity)
        for i in range(60):
            row = p[i][p[i] > 0]
            entropy_bits = -float(np.sum(row * np.log2(row)))
            assert entropy_bits == pytest.approx(math.log2(perplexity), abs=1e-4)

        brng = np.random.default_rng(1000)
        blob = np.vstack([
            brng.normal(size=(10, 5)),
            brng.normal(loc=40.0, size=(10, 5)),
        ])
        labels = ["a"] * 10 + ["b"] * 10
        coords, kl0, kl1 = tsne_2d(
            blob, ProjectionConfig(method="tsne", perplexity=5.0, seed=9, iterations=2000)
        )
        assert kl1 < kl0
        silhouette = o.o_silhouette([list(c) for c in coords], labels)
        assert silhouette > 0.8

        t = np.linspace(0.0, 3.0, 50)
        rank1 = np.column_stack([2.0 * t, -t])
        _, explained = pca_2d(rank1)
        assert explained[0] == pytest.approx(1.0, abs=1e-10)
        assert explained[1] == pytest.approx(0.0, abs=1e-10)


# -- 7. determinism across reruns and worker counts -----------------------------------

def _sha(path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_criterion_determinism_across_threads(tmp_path):
    with criterion("byte-identical artifacts across reruns and 1 vs 8 threads", 240.0):
        rng = np.random.default_rng(13)
        data = tmp_path / "data.csv"
        lines = ["id,timepoint,values,group"]
        for g, loc in (("a", 0.0), ("b", 1.5)):
            for i in range(8):
                for t, v in enumerate(rng.normal(loc=loc, size=48)):
                    lines.append(f"{g}{i},{t},{float(v)!r},{g}")
        data.write_text("\n".join(lines) + "\n", encoding="utf-8")

        def run_all(tag: str, threads: int) -> dict[str, str]:
            outs = {}
            base = tmp_path / tag
            assert cli_main(["extract", "--input", str(data), "--threads", str(threads),
                             "--out-dir", str(base / "ex")]) == 0
            feats = str(base / "ex" / "features.csv")
            outs["features.csv"] = _sha(base / "ex" / "features.csv")
            outs["quality.json"] = _sha(base / "ex" / "quality.json")
            assert cli_main(["analyze", "matrix", "--features", feats,
                             "--out-dir", str(base / "mx")]) == 0
            outs["matrix.json"] = _sha(base / "mx" / "matrix.json")
            outs["heatmap.svg"] = _sha(base / "mx" / "heatmap.svg")
            assert cli_main(["analyze", "project", "--features", feats, "--method", "tsne",
                             "--perplexity", "3", "--iterations", "250", "--seed", "11",
                             "--out-dir", str(base / "pj")]) == 0
            outs["embedding.json"] = _sha(base / "pj" / "embedding.json")
            assert cli_main(["analyze", "classify", "--features", feats, "--folds", "4",
                             "--null", "model-free", "--permutations", "400",
                             "--seed", "2", "--threads", str(threads),
                             "--out-dir", str(base / "cl")]) == 0
            outs["classification.json"] = _sha(base / "cl" / "classification.json")
            assert cli_main(["analyze", "top-features", "--features", feats,
                             "--num-features", "6", "--test", "t-test", "--folds", "4",
                             "--seed", "2", "--threads", str(threads),
                             "--out-dir", str(base / "tf")]) == 0
            outs["top_features.json"] = _sha(base / "tf" / "top_features.json")
            outs["top_features.csv"] = _sha(base / "tf" / "top_features.csv")
            outs["violins.svg"] = _sha(base / "tf" / "violins.svg")
            return outs

        first = run_all("run1_t1", threads=1)
        again = run_all("run2_t1", threads=1)
        wide = run_all("run3_t8", threads=8)
        assert first == again, "rerun with identical seeds changed artifacts"
        assert first == wide, "worker count changed artifacts"


# -- 8. service contract ----------------------------------------------------------------

def test_criterion_service_contract():
    from featkit.service import build_server

    with criterion("service REST contract", 120.0):
        srv = build_server(host="127.0.0.1", port=0, threads=2)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{srv.server_address[1]}"

        def call(method, path, body=None, ctype="application/json"):
            req = urllib.request.Request(
                base + path, data=body, method=method,
                headers={"Content-Type": ctype} if body is not None else {},
            )
            try:
                with urllib.request.urlopen(req) as resp:
                    return resp.status, resp.read()
            except urllib.error.HTTPError as err:
                return err.code, err.read()

        try:
            rng = np.random.default_rng(17)
            lines = ["id,timepoint,values,group"]
            for g, loc in (("a", 0.0), ("b", 2.0)):
                for i in range(6):
                    for t, v in enumerate(rng.normal(loc=loc, size=32)):
                        lines.append(f"{g}{i},{t},{float(v)!r},{g}")
            csv_text = ("\n".join(lines) + "\n").encode()

            status, body = call("POST", "/datasets", csv_text, "text/csv")
            assert status == 201
            dataset_id = json.loads(body)["dataset_id"]

            status, body = call("POST", "/datasets", b"id,timepoint,values\nA,1,1\nA,1,2\n", "text/csv")
            assert status == 422 and json.loads(body)["error"] == "DuplicateTimepoint"

            status, _ = call("GET", "/datasets/ds_missing")
            assert status == 404

            payload = json.dumps({"dataset_id": dataset_id, "kind": "project",
                                  "params": {"method": "pca"}}).encode()
            status, body = call("POST", "/jobs", payload)
            assert status == 201
            job = json.loads(body)

            deadline = time.time() + 60
            state = job["state"]
            while state not in ("done", "failed") and time.time() < deadline:
                status, body = call("GET", f"/jobs/{job['job_id']}")
                assert status == 200
                state = json.loads(body)["state"]
                time.sleep(0.02)
            assert state == "done"

            status, body = call("GET", f"/jobs/{job['job_id']}/result")
            assert status == 200
            first_result = body

            # caching by canonical params: resubmission returns the same job
            status, body = call("POST", "/jobs", payload)
            resub = json.loads(body)
            assert resub["job_id"] == job["job_id"] and resub["state"] == "done"
            status, body = call("GET", f"/jobs/{resub['job_id']}/result")
            assert body == first_result

            status, body = call("POST", "/jobs", json.dumps(
                {"dataset_id": dataset_id, "kind": "bogus"}).encode())
            assert status == 422
            status, body = call("POST", "/jobs", b"{broken")
            assert status == 400
            status, body = call("GET", "/datasets/" + dataset_id + "/features.csv")
            assert status == 200 and body.splitlines()[0] == b"id,names,values,method,group"
            status, body = call("GET", "/spec")
            assert status == 200 and json.loads(body)["openapi"].startswith("3.")
        finally:
            srv.shutdown()
            srv.server_close()
