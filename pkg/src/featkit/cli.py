"""Command-line front door: extract features, run analysis stages, serve.

Every command writes its JSON/CSV artifacts plus a run manifest into
``--out-dir``; ``featkit rerun manifest.json`` replays a recorded run and
reproduces the artifacts byte for byte. Parameters can also come from a
TOML file via ``--config`` (command-line flags win).

Exit codes: 0 ok, 2 usage or schema error, 3 data degeneracy, 4 numerical
failure, 5 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__
from .dataset import ingest_long_csv, zscore_series
from .errors import FeatkitError
from .features import FeatureTable, extract_features, quality_report
from .jobs import default_params, run_job
from .svg import (
    accuracy_bars_svg,
    correlation_svg,
    heatmap_svg,
    quality_bars_svg,
    scatter_svg,
    violins_svg,
)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_INTERNAL = 5

_CATEGORY_EXIT = {"schema": EXIT_SCHEMA, "data": EXIT_DATA, "numeric": EXIT_NUMERIC}

EXTRACT_DEFAULTS = {
    "id": "id",
    "time": "timepoint",
    "value": "values",
    "group": "auto",
    "zscore": False,
    "threads": 0,  # 0 -> available parallelism
}

SERVE_DEFAULTS = {
    "host": "127.0.0.1",
    "port": 8714,
    "threads": 0,
    "data_dir": None,
    "max_upload_mb": 256,
    "ui_dir": None,
}

ANALYZE_KINDS = {
    "matrix": "matrix",
    "project": "project",
    "classify": "classify",
    "top-features": "top_features",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featkit",
        description="Feature-based time-series analysis: extraction, quality, "
        "normalization, clustering, embeddings, classification, top features.",
    )
    parser.add_argument("--version", action="version", version=f"featkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="compute the feature catalog from a long-format CSV")
    ex.add_argument("--input", required=True, help="long-format CSV (id,timepoint,values[,group])")
    ex.add_argument("--id", help="id column name (default: id)")
    ex.add_argument("--time", help="time column name (default: timepoint)")
    ex.add_argument("--value", help="value column name (default: values)")
    ex.add_argument("--group", help="group column name; 'auto' uses a 'group' column when present, 'none' ignores labels")
    ex.add_argument("--zscore", action=argparse.BooleanOptionalAction, help="z-score each series before extraction")
    ex.add_argument("--threads", type=int, help="worker threads (0 = available parallelism)")
    _common_io(ex)

    an = sub.add_parser("analyze", help="run one analysis stage over extracted features")
    stage = an.add_subparsers(dest="stage", required=True)

    mx = stage.add_parser("matrix", help="normalized, cluster-ordered series x feature matrix")
    mx.add_argument("--method", help="normalization method (default: z-score)")
    mx.add_argument("--linkage", help="average | single | complete")
    _features_io(mx)

    pj = stage.add_parser("project", help="2-D embedding (PCA or t-SNE)")
    pj.add_argument("--method", help="pca | tsne")
    pj.add_argument("--normalize", help="normalization method applied first (default: z-score)")
    pj.add_argument("--perplexity", type=float, help="t-SNE perplexity (default: 15)")
    pj.add_argument("--seed", type=int)
    pj.add_argument("--iterations", type=int, help="t-SNE gradient steps (default: 1000)")
    _features_io(pj)

    cl = stage.add_parser("classify", help="multi-feature classifier, optionally per feature set")
    cl.add_argument("--by-set", dest="by_set", action=argparse.BooleanOptionalAction)
    cl.add_argument("--classifier", help="svm-linear | binomial-logistic")
    cl.add_argument("--regularization", type=float)
    cl.add_argument("--folds", type=int)
    cl.add_argument("--use-k-fold", dest="use_k_fold", action=argparse.BooleanOptionalAction)
    cl.add_argument("--balanced", action=argparse.BooleanOptionalAction,
                    help="report balanced accuracy (default) instead of plain accuracy")
    cl.add_argument("--null", help="none | model-free | model-fits")
    cl.add_argument("--permutations", type=int)
    cl.add_argument("--pvalue", dest="p_value_method", help="gaussian | empirical")
    cl.add_argument("--seed", type=int)
    cl.add_argument("--threads", type=int)
    _features_io(cl)

    tf = stage.add_parser("top-features", help="rank features by univariate class separation")
    tf.add_argument("--num-features", dest="num_features", type=int)
    tf.add_argument("--test", help="one-d-classifier | t-test | wilcoxon | binomial-logistic")
    tf.add_argument("--classifier", help="svm-linear | binomial-logistic (for one-d-classifier)")
    tf.add_argument("--regularization", type=float)
    tf.add_argument("--folds", type=int)
    tf.add_argument("--use-k-fold", dest="use_k_fold", action=argparse.BooleanOptionalAction)
    tf.add_argument("--balanced", action=argparse.BooleanOptionalAction)
    tf.add_argument("--null", help="none | model-free | model-fits")
    tf.add_argument("--permutations", type=int)
    tf.add_argument("--pvalue", dest="p_value_method", help="gaussian | empirical")
    tf.add_argument("--cor", dest="cor_method", help="spearman | pearson")
    tf.add_argument("--absolute", action=argparse.BooleanOptionalAction,
                    help="use |rho| in the correlation matrix (default)")
    tf.add_argument("--seed", type=int)
    tf.add_argument("--threads", type=int)
    _features_io(tf)

    sv = sub.add_parser("serve", help="start the HTTP/JSON service")
    sv.add_argument("--host")
    sv.add_argument("--port", type=int)
    sv.add_argument("--threads", type=int)
    sv.add_argument("--data-dir", dest="data_dir", help="persist artifacts and uploads here")
    sv.add_argument("--max-upload-mb", dest="max_upload_mb", type=int)
    sv.add_argument("--ui-dir", dest="ui_dir", help="serve the explorer's static build from this directory")
    sv.add_argument("--config", help="TOML file with parameter defaults")

    rr = sub.add_parser("rerun", help="replay a recorded run manifest")
    rr.add_argument("manifest", help="manifest.json produced by a previous run")

    return parser


def _common_io(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-dir", dest="out_dir", required=True, help="artifact output directory")
    p.add_argument("--config", help="TOML file with parameter defaults")


def _features_io(p: argparse.ArgumentParser) -> None:
    p.add_argument("--features", required=True, help="features CSV from `featkit extract`")
    _common_io(p)


# ---------------------------------------------------------------------------
# parameter resolution and manifests
# ---------------------------------------------------------------------------

def _load_config(path: str | None, section: str) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    merged = {k: v for k, v in data.items() if not isinstance(v, dict)}
    node = data
    for part in section.split("."):
        node = node.get(part, {}) if isinstance(node, dict) else {}
    if isinstance(node, dict):
        merged.update({k: v for k, v in node.items() if not isinstance(v, dict)})
    return merged


def _effective(defaults: dict, config: dict, cli: dict) -> dict:
    out = dict(defaults)
    for key, value in config.items():
        key = key.replace("-", "_")
        if key in out:
            out[key] = value
    for key, value in cli.items():
        if value is not None and key in out:
            out[key] = value
    return out


def write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n",
        encoding="utf-8",
    )


def _write_manifest(
    out_dir: Path,
    command: str,
    parameters: dict,
    input_path: str,
    outputs: list[str],
    elapsed: dict[str, float],
) -> None:
    manifest = {
        "engine": f"featkit {__version__}",
        "command": command,
        "input": input_path,
        "parameters": parameters,
        "seeds": {k: v for k, v in parameters.items() if "seed" in k},
        "outputs": sorted(outputs),
        "wall_clock_seconds": {k: round(v, 6) for k, v in elapsed.items()},
    }
    write_json(out_dir / "manifest.json", manifest)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _resolve_threads(value: int) -> int:
    import os

    if value and value > 0:
        return value
    return os.cpu_count() or 1


def cmd_extract(params: dict) -> int:
    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    group = params["group"]
    group_col: str | None
    if group == "auto":
        with open(params["input"], encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
        group_col = "group" if "group" in header else None
    elif group in ("none", ""):
        group_col = None
    else:
        group_col = group

    d = ingest_long_csv(
        params["input"], id_col=params["id"], time_col=params["time"],
        value_col=params["value"], group_col=group_col,
    )
    if params["zscore"]:
        d = zscore_series(d)
    ft = extract_features(d, threads=_resolve_threads(params["threads"]))
    report = quality_report(ft)

    ft.write_csv(out_dir / "features.csv")
    write_json(out_dir / "quality.json", report.to_json_dict())
    (out_dir / "quality.svg").write_text(quality_bars_svg(report.to_json_dict()), encoding="utf-8")
    _write_manifest(
        out_dir, "extract", params, params["input"],
        ["features.csv", "quality.json", "quality.svg"],
        {"extract": time.perf_counter() - started},
    )
    print(f"extracted {len(ft.feature_names())} features x {len(ft.series_ids())} series "
          f"-> {out_dir / 'features.csv'}")
    return EXIT_OK


_STAGE_ARTIFACTS = {
    "matrix": "matrix.json",
    "project": "embedding.json",
    "classify": "classification.json",
    "top_features": "top_features.json",
}


def cmd_analyze(stage: str, params: dict) -> int:
    kind = ANALYZE_KINDS[stage]
    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    ft = FeatureTable.read_csv(params["features"])
    job_params = {k: params[k] for k in default_params(kind)}
    threads = _resolve_threads(params.get("threads", 1) or 1)
    artifact = run_job(kind, ft, job_params, threads=threads)

    outputs = [_STAGE_ARTIFACTS[kind]]
    write_json(out_dir / _STAGE_ARTIFACTS[kind], artifact)

    if kind == "matrix":
        import numpy as np

        svg = heatmap_svg(
            np.array(artifact["values"]), artifact["row_order"], artifact["col_order"],
            title="series x feature matrix",
        )
        (out_dir / "heatmap.svg").write_text(svg, encoding="utf-8")
        outputs.append("heatmap.svg")
    elif kind == "project":
        import numpy as np

        labels = None
        if artifact.get("variance_explained"):
            ve = artifact["variance_explained"]
            labels = (f"PC1 ({ve[0] * 100:.1f}% var)", f"PC2 ({ve[1] * 100:.1f}% var)")
        svg = scatter_svg(
            np.array(artifact["coords"]), artifact.get("groups"),
            artifact.get("ellipses"), title=f"{artifact['method']} embedding",
            axis_labels=labels,
        )
        (out_dir / "embedding.svg").write_text(svg, encoding="utf-8")
        outputs.append("embedding.svg")
    elif kind == "classify":
        svg = accuracy_bars_svg(artifact, title=f"{artifact['statistic']} by feature set")
        (out_dir / "accuracy.svg").write_text(svg, encoding="utf-8")
        outputs.append("accuracy.svg")
    elif kind == "top_features":
        (out_dir / "correlation.svg").write_text(
            correlation_svg(artifact["correlation"]), encoding="utf-8"
        )
        (out_dir / "violins.svg").write_text(violins_svg(artifact["violins"]), encoding="utf-8")
        _write_top_features_csv(out_dir / "top_features.csv", artifact)
        outputs += ["correlation.svg", "violins.svg", "top_features.csv"]

    _write_manifest(
        out_dir, f"analyze.{stage}", params, params["features"], outputs,
        {stage: time.perf_counter() - started},
    )
    print(f"wrote {', '.join(sorted(outputs))} to {out_dir}")
    return EXIT_OK


def _write_top_features_csv(path: Path, artifact: dict) -> None:
    import csv

    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "set", "statistic", "p_value", "adjusted_p"])
        for row in artifact["rows"]:
            writer.writerow([
                row["feature"], row["set"], repr(row["statistic"]),
                repr(row["p_value"]), repr(row["adjusted_p"]),
            ])


def cmd_serve(params: dict) -> int:
    from .service import build_server, serve_forever

    server = build_server(
        host=params["host"],
        port=params["port"],
        threads=_resolve_threads(params["threads"]),
        data_dir=params["data_dir"],
        max_upload=params["max_upload_mb"] * 1024 * 1024,
        ui_dir=params["ui_dir"],
    )
    print(f"featkit service on http://{params['host']}:{server.server_address[1]}", flush=True)
    serve_forever(server)
    return EXIT_OK


def cmd_rerun(manifest_path: str) -> int:
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    command = manifest["command"]
    parameters = manifest["parameters"]
    if command == "extract":
        return cmd_extract(parameters)
    if command.startswith("analyze."):
        return cmd_analyze(command.split(".", 1)[1], parameters)
    raise ValueError(f"manifest command {command!r} cannot be rerun")


# ---------------------------------------------------------------------------

def _stage_defaults(stage: str) -> dict:
    kind = ANALYZE_KINDS[stage]
    defaults = dict(default_params(kind))
    if kind in ("classify", "top_features"):
        defaults["threads"] = 0
    return defaults


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")

    try:
        if command == "extract":
            config = _load_config(args.get("config"), "extract")
            params = _effective(EXTRACT_DEFAULTS, config, args)
            params["input"] = args["input"]
            params["out_dir"] = args["out_dir"]
            return cmd_extract(params)
        if command == "analyze":
            stage = args.pop("stage")
            config = _load_config(args.get("config"), f"analyze.{stage}")
            params = _effective(_stage_defaults(stage), config, args)
            params["features"] = args["features"]
            params["out_dir"] = args["out_dir"]
            return cmd_analyze(stage, params)
        if command == "serve":
            config = _load_config(args.get("config"), "serve")
            params = _effective(SERVE_DEFAULTS, config, args)
            return cmd_serve(params)
        if command == "rerun":
            return cmd_rerun(args["manifest"])
        parser.error(f"unknown command {command!r}")
    except FeatkitError as exc:
        print(f"error [{exc.name}]: {exc}", file=sys.stderr)
        return _CATEGORY_EXIT.get(exc.category, EXIT_INTERNAL)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except Exception as exc:  # pragma: no cover
        import traceback

        traceback.print_exc()
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
