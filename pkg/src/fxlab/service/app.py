"""HTTP facade over the pipeline.

Runs execute synchronously inside the request: this is a lab service for
kicking off experiment runs and fetching their reports, not a public API.
Errors surface as a structured body whose `category` tells clients whether
the request (config) or the referenced data is at fault.
"""

from __future__ import annotations

import importlib.resources
import json

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, pipeline
from ..errors import ConfigError, DataError, FxlabError
from .schemas import (
    DefaultsResponse,
    EmbedRequest,
    HealthResponse,
    IngestCheckRequest,
    IngestCheckResponse,
    ReportRequest,
    ReportResponse,
    RunRequest,
    RunResponse,
)

app = FastAPI(title="fxlab", version=__version__)


@app.exception_handler(FxlabError)
async def fxlab_error_handler(_: Request, exc: FxlabError):
    category = "config" if isinstance(exc, ConfigError) else "data"
    return JSONResponse(
        status_code=400,
        content={"category": category, "error": type(exc).__name__, "message": str(exc)},
    )


@app.exception_handler(FileNotFoundError)
async def missing_file_handler(_: Request, exc: FileNotFoundError):
    return JSONResponse(
        status_code=400,
        content={"category": "data", "error": "FileNotFoundError", "message": str(exc)},
    )


def _config_from(request: RunRequest) -> pipeline.RunConfig:
    return pipeline.load_config(request.config_path, request.config.overrides())


def _run_response(manifest: dict, out: str) -> RunResponse:
    return RunResponse(
        command=manifest["command"],
        out=out,
        seed=manifest["seed"],
        config_hash=manifest["config_hash"],
        artifacts=manifest["artifacts"],
        summary=manifest["summary"],
        validation_accesses=manifest.get("validation_accesses"),
        baseline_fitness=manifest.get("baseline_fitness"),
        best_fitness=manifest.get("best_fitness"),
    )


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/config/defaults", response_model=DefaultsResponse)
def config_defaults() -> DefaultsResponse:
    return DefaultsResponse(config_text=pipeline.RunConfig().to_text())


@app.get("/schemas/run-report")
def run_report_schema() -> dict:
    text = importlib.resources.files("fxlab.schemas").joinpath("run_report.schema.json").read_text()
    return json.loads(text)


@app.post("/ingest-check", response_model=IngestCheckResponse)
def ingest_check(request: IngestCheckRequest) -> IngestCheckResponse:
    return IngestCheckResponse(**pipeline.ingest_check(request.data))


@app.post("/runs/baseline", response_model=RunResponse)
def baseline(request: RunRequest) -> RunResponse:
    config = _config_from(request)
    manifest = pipeline.run_baseline(config)
    return _run_response(manifest, config.out)


@app.post("/runs/optimize", response_model=RunResponse)
def optimize(request: RunRequest) -> RunResponse:
    config = _config_from(request)
    manifest = pipeline.run_optimize(config)
    return _run_response(manifest, config.out)


@app.post("/runs/embed", response_model=RunResponse)
def embed(request: EmbedRequest) -> RunResponse:
    config = _config_from(request)
    manifest = pipeline.run_embed(config, request.chromosome_path)
    return _run_response(manifest, config.out)


@app.post("/report", response_model=ReportResponse)
def report(request: ReportRequest) -> ReportResponse:
    manifest = pipeline.summarize(request.out)
    return ReportResponse(manifest=manifest, text=pipeline.render_summary(manifest))
