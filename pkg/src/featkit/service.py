"""HTTP/JSON facade over the pipeline: uploads, async jobs, artifacts.

Design: in-memory stores guarded by one lock, a FIFO worker pool for job
execution, and content-addressed results — resubmitting a job with the same
dataset, kind and canonical parameters returns the original job id and its
cached artifact. With ``data_dir`` set, artifacts and uploads also persist
to disk and survive restarts. CORS is open so the browser explorer can talk
to the service from any origin.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import __version__
from .dataset import Dataset, ingest_long_text, zscore_series
from .errors import FeatkitError
from .features import FeatureTable, extract_features
from .jobs import JOB_KINDS, canonical_params, job_key, run_job

log = logging.getLogger(__name__)

MAX_UPLOAD_BYTES = 256 * 1024 * 1024


@dataclass
class Job:
    job_id: str
    dataset_id: str
    kind: str
    params: dict
    state: str = "queued"  # queued -> running -> done | failed
    error_name: str | None = None
    error_message: str | None = None
    result: dict | None = None

    def public(self) -> dict:
        out = {
            "job_id": self.job_id,
            "dataset_id": self.dataset_id,
            "kind": self.kind,
            "params": self.params,
            "state": self.state,
        }
        if self.state == "failed":
            out["error"] = self.error_name
            out["message"] = self.error_message
        return out


class EngineState:
    """Datasets, lazily extracted features, and the job registry."""

    def __init__(
        self,
        threads: int = 2,
        data_dir: str | Path | None = None,
        max_upload: int = MAX_UPLOAD_BYTES,
    ):
        self.lock = threading.RLock()
        self.datasets: dict[str, Dataset] = {}
        self.dataset_meta: dict[str, dict] = {}
        self.features: dict[str, FeatureTable] = {}
        self.feature_locks: dict[str, threading.Lock] = {}
        self.jobs: dict[str, Job] = {}
        self.max_upload = max_upload
        self.threads = max(1, threads)
        self.pool = ThreadPoolExecutor(max_workers=self.threads)
        self.data_dir = Path(data_dir) if data_dir else None
        if self.data_dir:
            (self.data_dir / "artifacts").mkdir(parents=True, exist_ok=True)
            (self.data_dir / "datasets").mkdir(parents=True, exist_ok=True)
            for path in sorted((self.data_dir / "datasets").glob("ds_*.json")):
                try:
                    payload = json.loads(path.read_text(encoding="utf-8"))
                    self.add_dataset(payload["csv"], payload["options"])
                except Exception:
                    log.warning("could not restore dataset from %s", path, exc_info=True)

    # -- datasets ------------------------------------------------------------

    def add_dataset(self, text: str, options: dict) -> str:
        digest = hashlib.sha256(
            (json.dumps(options, sort_keys=True) + text).encode()
        ).hexdigest()[:16]
        dataset_id = f"ds_{digest}"
        with self.lock:
            if dataset_id in self.datasets:
                return dataset_id
        group_col = options.get("group_col")
        d = ingest_long_text(
            text,
            id_col=options.get("id_col", "id"),
            time_col=options.get("time_col", "timepoint"),
            value_col=options.get("value_col", "values"),
            group_col=group_col,
        )
        if options.get("zscore"):
            d = zscore_series(d)
        meta = {
            "dataset_id": dataset_id,
            "n_series": d.n_series,
            "labeled": d.labels is not None,
            "groups": sorted(set(d.labels.values())) if d.labels else [],
        }
        with self.lock:
            self.datasets[dataset_id] = d
            self.dataset_meta[dataset_id] = meta
            self.feature_locks[dataset_id] = threading.Lock()
        if self.data_dir:
            payload = {"options": options, "csv": text}
            (self.data_dir / "datasets" / f"{dataset_id}.json").write_text(
                json.dumps(payload), encoding="utf-8"
            )
        return dataset_id

    def get_dataset(self, dataset_id: str) -> Dataset | None:
        with self.lock:
            return self.datasets.get(dataset_id)

    def features_for(self, dataset_id: str) -> FeatureTable:
        with self.lock:
            cached = self.features.get(dataset_id)
            flock = self.feature_locks[dataset_id]
        if cached is not None:
            return cached
        with flock:
            with self.lock:
                cached = self.features.get(dataset_id)
            if cached is not None:
                return cached
            ft = extract_features(self.datasets[dataset_id], threads=self.threads)
            with self.lock:
                self.features[dataset_id] = ft
            return ft

    # -- jobs ------------------------------------------------------------------

    def submit_job(self, dataset_id: str, kind: str, params: dict | None) -> Job:
        canon = canonical_params(kind, params)
        job_id = job_key(dataset_id, kind, canon)
        with self.lock:
            existing = self.jobs.get(job_id)
            if existing is not None:
                return existing
            job = Job(job_id=job_id, dataset_id=dataset_id, kind=kind, params=canon)
            disk = self._load_artifact(job_id)
            if disk is not None:
                job.state = "done"
                job.result = disk
            self.jobs[job_id] = job
        if job.state == "queued":
            self.pool.submit(self._run, job_id)
        return job

    def _artifact_path(self, job_id: str) -> Path | None:
        if not self.data_dir:
            return None
        return self.data_dir / "artifacts" / f"{job_id}.json"

    def _load_artifact(self, job_id: str) -> dict | None:
        path = self._artifact_path(job_id)
        if path and path.exists():
            return json.loads(path.read_text(encoding="utf-8"))
        return None

    def _run(self, job_id: str) -> None:
        with self.lock:
            job = self.jobs[job_id]
            if job.state != "queued":
                return
            job.state = "running"
        try:
            ft = self.features_for(job.dataset_id)
            result = run_job(job.kind, ft, job.params, threads=self.threads)
        except FeatkitError as exc:
            with self.lock:
                job.state = "failed"
                job.error_name = exc.name
                job.error_message = str(exc)
            return
        except Exception as exc:  # keep the worker pool alive
            log.exception("job %s crashed", job_id)
            with self.lock:
                job.state = "failed"
                job.error_name = "InternalError"
                job.error_message = str(exc)
            return
        path = self._artifact_path(job_id)
        if path:
            path.write_text(json.dumps(result, sort_keys=True), encoding="utf-8")
        with self.lock:
            job.result = result
            job.state = "done"

    def get_job(self, job_id: str) -> Job | None:
        with self.lock:
            return self.jobs.get(job_id)


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------

_DATASET_OPTION_KEYS = ("id_col", "time_col", "value_col", "group_col", "zscore")


def openapi_document() -> dict:
    return {
        "openapi": "3.0.3",
        "info": {"title": "featkit service", "version": __version__},
        "paths": {
            "/datasets": {
                "post": {
                    "summary": "Upload a long-format CSV (text/csv body or multipart file)",
                    "parameters": [
                        {"name": k, "in": "query", "required": False, "schema": {"type": "string"}}
                        for k in _DATASET_OPTION_KEYS
                    ],
                    "responses": {"201": {"description": "dataset_id"}},
                }
            },
            "/datasets/{id}": {"get": {"summary": "Dataset metadata"}},
            "/datasets/{id}/features.csv": {
                "get": {"summary": "Tidy feature table download (id,names,values,method,group)"}
            },
            "/jobs": {
                "post": {
                    "summary": "Submit an analysis job",
                    "description": f"kinds: {', '.join(JOB_KINDS)}; results are "
                    "content-addressed by (dataset_id, kind, params)",
                    "responses": {"201": {"description": "job_id"}},
                }
            },
            "/jobs/{id}": {"get": {"summary": "Job state"}},
            "/jobs/{id}/result": {"get": {"summary": "Artifact JSON (409 until done)"}},
            "/spec": {"get": {"summary": "This document"}},
        },
    }


class ApiHandler(BaseHTTPRequestHandler):
    server_version = f"featkit/{__version__}"
    protocol_version = "HTTP/1.1"

    @property
    def state(self) -> EngineState:
        return self.server.state  # type: ignore[attr-defined]

    @property
    def ui_dir(self) -> Path | None:
        return self.server.ui_dir  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):
        log.debug("%s %s", self.address_string(), fmt % args)

    # -- responses -------------------------------------------------------------

    def _headers(self, status: int, content_type: str, length: int) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(length))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        # one request per connection keeps the threading model simple and
        # avoids lingering keep-alive handler threads under bursts
        self.send_header("Connection", "close")
        self.end_headers()

    def _json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, sort_keys=True).encode()
        self._headers(status, "application/json", len(body))
        self.wfile.write(body)

    def _error(self, status: int, name: str, message: str) -> None:
        self._json(status, {"error": name, "message": message})

    def _domain_error(self, exc: FeatkitError) -> None:
        self._json(422, {"error": exc.name, "message": str(exc)})

    # -- verbs -----------------------------------------------------------------

    def do_OPTIONS(self):  # noqa: N802 (stdlib naming)
        self._headers(204, "text/plain", 0)

    def do_POST(self):  # noqa: N802
        try:
            if self.path.split("?")[0] == "/datasets":
                self._post_dataset()
            elif self.path == "/jobs":
                self._post_job()
            else:
                self._error(404, "NotFound", f"unknown path {self.path}")
        except FeatkitError as exc:
            self._domain_error(exc)
        except Exception as exc:
            log.exception("request failed")
            self._error(500, "InternalError", str(exc))

    def do_GET(self):  # noqa: N802
        try:
            path = self.path.split("?")[0]
            if path == "/spec":
                self._json(200, openapi_document())
            elif path == "/datasets":
                with self.state.lock:
                    metas = sorted(self.state.dataset_meta.values(), key=lambda m: m["dataset_id"])
                self._json(200, {"datasets": metas})
            elif m := re.fullmatch(r"/datasets/([\w-]+)", path):
                self._get_dataset(m.group(1))
            elif m := re.fullmatch(r"/datasets/([\w-]+)/features\.csv", path):
                self._get_features_csv(m.group(1))
            elif m := re.fullmatch(r"/jobs/([\w-]+)", path):
                self._get_job(m.group(1))
            elif m := re.fullmatch(r"/jobs/([\w-]+)/result", path):
                self._get_job_result(m.group(1))
            else:
                self._get_static(path)
        except FeatkitError as exc:
            self._domain_error(exc)
        except Exception as exc:
            log.exception("request failed")
            self._error(500, "InternalError", str(exc))

    # -- handlers ----------------------------------------------------------------

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        if length > self.state.max_upload:
            raise _TooLarge(length)
        return self.rfile.read(length)

    def _post_dataset(self) -> None:
        from urllib.parse import parse_qsl, urlparse

        query = dict(parse_qsl(urlparse(self.path).query))
        options = {}
        for key in _DATASET_OPTION_KEYS:
            if key in query:
                options[key] = query[key]
        if "zscore" in options:
            options["zscore"] = options["zscore"] in ("1", "true", "yes")
        try:
            raw = self._read_body()
        except _TooLarge as exc:
            self._error(413, "UploadTooLarge", str(exc))
            return
        content_type = self.headers.get("Content-Type", "")
        if content_type.startswith("multipart/form-data"):
            text = _extract_multipart_file(raw, content_type)
            if text is None:
                self._error(400, "BadUpload", "no file part found in multipart body")
                return
        else:
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError:
                self._error(400, "BadUpload", "body is not valid UTF-8 CSV")
                return
        if not text.strip():
            self._error(400, "BadUpload", "empty upload")
            return
        if "group_col" not in options:
            header = text.splitlines()[0].split(",")
            if "group" in header:
                options["group_col"] = "group"
        dataset_id = self.state.add_dataset(text, options)
        self._json(201, {"dataset_id": dataset_id, **self.state.dataset_meta[dataset_id]})

    def _post_job(self) -> None:
        try:
            raw = self._read_body()
        except _TooLarge as exc:
            self._error(413, "UploadTooLarge", str(exc))
            return
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            self._error(400, "BadRequest", f"malformed JSON body: {exc}")
            return
        dataset_id = payload.get("dataset_id")
        kind = payload.get("kind")
        params = payload.get("params") or {}
        if not isinstance(params, dict) or not isinstance(dataset_id, str) or not isinstance(kind, str):
            self._error(400, "BadRequest", "expected {dataset_id, kind, params?}")
            return
        if self.state.get_dataset(dataset_id) is None:
            self._error(404, "UnknownDataset", f"no dataset {dataset_id!r}")
            return
        if kind not in JOB_KINDS:
            self._error(422, "UnknownKind", f"kind must be one of {JOB_KINDS}")
            return
        try:
            job = self.state.submit_job(dataset_id, kind, params)
        except ValueError as exc:
            self._error(422, "BadParams", str(exc))
            return
        self._json(201, job.public())

    def _get_dataset(self, dataset_id: str) -> None:
        with self.state.lock:
            meta = self.state.dataset_meta.get(dataset_id)
        if meta is None:
            self._error(404, "UnknownDataset", f"no dataset {dataset_id!r}")
            return
        self._json(200, meta)

    def _get_features_csv(self, dataset_id: str) -> None:
        if self.state.get_dataset(dataset_id) is None:
            self._error(404, "UnknownDataset", f"no dataset {dataset_id!r}")
            return
        ft = self.state.features_for(dataset_id)
        body = ft.to_csv_text().encode()
        self._headers(200, "text/csv; charset=utf-8", len(body))
        self.wfile.write(body)

    def _get_job(self, job_id: str) -> None:
        job = self.state.get_job(job_id)
        if job is None:
            self._error(404, "UnknownJob", f"no job {job_id!r}")
            return
        self._json(200, job.public())

    def _get_job_result(self, job_id: str) -> None:
        job = self.state.get_job(job_id)
        if job is None:
            self._error(404, "UnknownJob", f"no job {job_id!r}")
            return
        if job.state in ("queued", "running"):
            self._error(409, "JobNotDone", f"job is {job.state}")
            return
        if job.state == "failed":
            self._json(422, {"error": job.error_name, "message": job.error_message})
            return
        self._json(200, job.result)

    def _get_static(self, path: str) -> None:
        if self.ui_dir is None:
            self._error(404, "NotFound", f"unknown path {path}")
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            target = self.ui_dir / "index.html"
            if not target.is_file():
                self._error(404, "NotFound", f"unknown path {path}")
                return
        body = target.read_bytes()
        content_type = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript",
            ".css": "text/css",
            ".svg": "image/svg+xml",
            ".json": "application/json",
        }.get(target.suffix, "application/octet-stream")
        self._headers(200, content_type, len(body))
        self.wfile.write(body)


class _TooLarge(Exception):
    def __init__(self, length: int):
        super().__init__(f"upload of {length} bytes exceeds the configured cap")


def _extract_multipart_file(raw: bytes, content_type: str) -> str | None:
    """Pull the first file part out of a multipart/form-data body."""
    m = re.search(r'boundary="?([^";]+)"?', content_type)
    if not m:
        return None
    boundary = b"--" + m.group(1).encode()
    for part in raw.split(boundary):
        if b"\r\n\r\n" not in part:
            continue
        head, _, body = part.partition(b"\r\n\r\n")
        if b"content-disposition" not in head.lower():
            continue
        body = body.rstrip(b"\r\n-")
        try:
            return body.decode("utf-8")
        except UnicodeDecodeError:
            return None
    return None


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    request_queue_size = 128


def build_server(
    host: str = "127.0.0.1",
    port: int = 8714,
    threads: int = 2,
    data_dir: str | None = None,
    max_upload: int = MAX_UPLOAD_BYTES,
    ui_dir: str | None = None,
) -> ThreadingHTTPServer:
    server = _Server((host, port), ApiHandler)
    server.state = EngineState(threads=threads, data_dir=data_dir, max_upload=max_upload)  # type: ignore[attr-defined]
    server.ui_dir = Path(ui_dir) if ui_dir else None  # type: ignore[attr-defined]
    return server


def serve_forever(server: ThreadingHTTPServer) -> None:
    host, port = server.server_address[:2]
    log.info("featkit service listening on http://%s:%s", host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
