"""Request and response models for the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class RunConfigModel(BaseModel):
    """Mirrors pipeline.RunConfig; unset fields take the library defaults."""

    data: Optional[str] = None
    out: Optional[str] = None
    seed: Optional[int] = None
    split_fraction: Optional[float] = None
    cv_folds: Optional[int] = None
    rejection_acceptance: Optional[float] = None
    trade_cost: Optional[float] = None
    ga_population: Optional[int] = None
    ga_generations: Optional[int] = None
    ga_crossover_rate: Optional[float] = None
    ga_mutation_rate: Optional[float] = None
    ga_hyper_mutation_rate: Optional[float] = None
    ga_replacement_rate: Optional[float] = None
    ga_slots: Optional[int] = None
    tsne_perplexity: Optional[float] = None
    tsne_iterations: Optional[int] = None
    tsne_learning_rate: Optional[float] = None
    tsne_subsample: Optional[int] = None

    def overrides(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class RunRequest(BaseModel):
    config_path: Optional[str] = None
    config: RunConfigModel = Field(default_factory=RunConfigModel)


class EmbedRequest(RunRequest):
    chromosome_path: str


class IngestCheckRequest(BaseModel):
    data: str


class IngestCheckResponse(BaseModel):
    rows: int
    first_timestamp: str
    last_timestamp: str
    up_label_share: float
    mean_close: float


class RunResponse(BaseModel):
    command: str
    out: str
    seed: int
    config_hash: str
    artifacts: list[str]
    summary: dict
    validation_accesses: Optional[int] = None
    baseline_fitness: Optional[float] = None
    best_fitness: Optional[float] = None


class ReportRequest(BaseModel):
    out: str


class ReportResponse(BaseModel):
    manifest: dict
    text: str


class DefaultsResponse(BaseModel):
    config_text: str


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorBody(BaseModel):
    category: str  # "config" | "data"
    error: str
    message: str
