from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from featkit.cli import build_parser, main


def write_dataset_csv(path: Path, n_per_group=8, length=40, seed=3) -> None:
    rng = np.random.default_rng(seed)
    lines = ["id,timepoint,values,group"]
    for g, loc in (("a", 0.0), ("b", 2.0)):
        for i in range(n_per_group):
            x = rng.normal(loc=loc, size=length)
            for t, v in enumerate(x):
                lines.append(f"{g}{i},{t},{float(v)!r},{g}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def extracted(tmp_path):
    data = tmp_path / "data.csv"
    write_dataset_csv(data)
    out = tmp_path / "out"
    assert main(["extract", "--input", str(data), "--out-dir", str(out)]) == 0
    return tmp_path, out


def test_help_lists_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    for sub in ("extract", "analyze", "serve", "rerun"):
        parser = build_parser()
        # every leaf parser's --help exits 0
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "classify", "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for flag in ("--by-set", "--null", "--permutations", "--pvalue", "--seed", "--folds"):
        assert flag in text


def test_extract_outputs(extracted):
    _, out = extracted
    assert (out / "features.csv").exists()
    assert (out / "quality.json").exists()
    assert (out / "quality.svg").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "extract"
    assert sorted(manifest["outputs"]) == ["features.csv", "quality.json", "quality.svg"]
    head = (out / "features.csv").read_text().splitlines()[0]
    assert head == "id,names,values,method,group"


def test_missing_column_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,timepoint\nA,1\n", encoding="utf-8")
    rc = main(["extract", "--input", str(bad), "--out-dir", str(tmp_path / "o")])
    assert rc == 2
    assert "MissingColumn" in capsys.readouterr().err


def test_zscore_constant_exits_3(tmp_path, capsys):
    flat = tmp_path / "flat.csv"
    flat.write_text(
        "id,timepoint,values\nA,0,1\nA,1,1\nA,2,1\nB,0,1\nB,1,2\n", encoding="utf-8"
    )
    rc = main(["extract", "--input", str(flat), "--zscore", "--out-dir", str(tmp_path / "o")])
    assert rc == 3
    err = capsys.readouterr().err
    assert "ConstantSeries" in err and "A" in err


def test_infeasible_perplexity_exits_4(extracted, capsys):
    tmp, out = extracted
    rc = main([
        "analyze", "project", "--features", str(out / "features.csv"),
        "--method", "tsne", "--perplexity", "50", "--out-dir", str(tmp / "p"),
    ])
    assert rc == 4
    assert "PerplexityInfeasible" in capsys.readouterr().err


def test_matrix_stage_and_rerun_reproducibility(extracted):
    tmp, out = extracted
    m1 = tmp / "m1"
    rc = main(["analyze", "matrix", "--features", str(out / "features.csv"),
               "--method", "z-score", "--out-dir", str(m1)])
    assert rc == 0
    payload = json.loads((m1 / "matrix.json").read_text())
    assert sorted(payload["row_order"]) == list(range(16))

    # rerun the manifest into the same directory -> byte-identical artifacts
    before = sha(m1 / "matrix.json")
    before_svg = sha(m1 / "heatmap.svg")
    assert main(["rerun", str(m1 / "manifest.json")]) == 0
    assert sha(m1 / "matrix.json") == before
    assert sha(m1 / "heatmap.svg") == before_svg


def test_project_deterministic_across_runs(extracted):
    tmp, out = extracted
    args = ["analyze", "project", "--features", str(out / "features.csv"),
            "--method", "tsne", "--perplexity", "3", "--iterations", "120", "--seed", "7"]
    assert main(args + ["--out-dir", str(tmp / "p1")]) == 0
    assert main(args + ["--out-dir", str(tmp / "p2")]) == 0
    assert sha(tmp / "p1" / "embedding.json") == sha(tmp / "p2" / "embedding.json")
    assert sha(tmp / "p1" / "embedding.svg") == sha(tmp / "p2" / "embedding.svg")


def test_classify_with_null_and_threads_invariance(extracted):
    tmp, out = extracted
    base = ["analyze", "classify", "--features", str(out / "features.csv"),
            "--folds", "4", "--null", "model-free", "--permutations", "400",
            "--pvalue", "gaussian", "--seed", "5"]
    assert main(base + ["--threads", "1", "--out-dir", str(tmp / "c1")]) == 0
    assert main(base + ["--threads", "8", "--out-dir", str(tmp / "c8")]) == 0
    assert sha(tmp / "c1" / "classification.json") == sha(tmp / "c8" / "classification.json")
    payload = json.loads((tmp / "c1" / "classification.json").read_text())
    sets = [r["set"] for r in payload["rows"]]
    assert "All features" in sets
    assert all("p_value" in r for r in payload["rows"])


def test_top_features_outputs_table_csv(extracted):
    tmp, out = extracted
    rc = main(["analyze", "top-features", "--features", str(out / "features.csv"),
               "--num-features", "5", "--test", "t-test", "--folds", "4",
               "--out-dir", str(tmp / "t")])
    assert rc == 0
    table = (tmp / "t" / "top_features.csv").read_text().splitlines()
    assert table[0] == "feature,set,statistic,p_value,adjusted_p"
    assert len(table) == 6
    assert (tmp / "t" / "correlation.svg").exists()
    assert (tmp / "t" / "violins.svg").exists()


def test_config_toml_defaults_and_cli_override(extracted, tmp_path):
    tmp, out = extracted
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(
        '[analyze.project]\nmethod = "pca"\nnormalize = "MinMax"\n', encoding="utf-8"
    )
    assert main(["analyze", "project", "--features", str(out / "features.csv"),
                 "--config", str(cfg), "--out-dir", str(tmp / "cfg_run")]) == 0
    payload = json.loads((tmp / "cfg_run" / "embedding.json").read_text())
    assert payload["method"] == "pca"
    manifest = json.loads((tmp / "cfg_run" / "manifest.json").read_text())
    assert manifest["parameters"]["normalize"] == "MinMax"

    # CLI flag beats the config file
    assert main(["analyze", "project", "--features", str(out / "features.csv"),
                 "--config", str(cfg), "--normalize", "z-score",
                 "--out-dir", str(tmp / "cfg_run2")]) == 0
    manifest2 = json.loads((tmp / "cfg_run2" / "manifest.json").read_text())
    assert manifest2["parameters"]["normalize"] == "z-score"


def test_serve_subprocess_answers_requests(tmp_path):
    import re
    import subprocess
    import sys
    import time
    import urllib.request

    proc = subprocess.Popen(
        [sys.executable, "-m", "featkit.cli", "serve", "--port", "0", "--threads", "1"],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True,
    )
    try:
        line = proc.stdout.readline()
        m = re.search(r"http://[\d.]+:(\d+)", line)
        assert m, f"no address line: {line!r}"
        port = int(m.group(1))
        deadline = time.time() + 10
        spec = None
        while time.time() < deadline:
            try:
                spec = urllib.request.urlopen(f"http://127.0.0.1:{port}/spec", timeout=2).read()
                break
            except OSError:
                time.sleep(0.1)
        assert spec is not None and b"openapi" in spec
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_manifest_lists_every_emitted_file(extracted):
    tmp, out = extracted
    rc = main(["analyze", "top-features", "--features", str(out / "features.csv"),
               "--num-features", "3", "--test", "t-test", "--folds", "4",
               "--out-dir", str(tmp / "mf")])
    assert rc == 0
    manifest = json.loads((tmp / "mf" / "manifest.json").read_text())
    emitted = {p.name for p in (tmp / "mf").iterdir()} - {"manifest.json"}
    assert set(manifest["outputs"]) == emitted
    assert manifest["seeds"] == {"seed": 0}
    assert "wall_clock_seconds" in manifest
