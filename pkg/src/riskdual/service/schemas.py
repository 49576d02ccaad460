"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class SolveRequest(BaseModel):
    config: str
    level: int | None = None
    step0: float | None = None
    iters: int | None = Field(default=None, ge=1)
    seed: int | None = None
    anchor_cap: int | None = Field(default=None, ge=1)
    include_trajectory: bool = False


class DualIterRow(BaseModel):
    iter: int
    lam: list[float]
    q: float
    best_feasible: float | None
    gap: float | None


class SlaterInfo(BaseModel):
    flag: str
    found: bool
    conclusive: bool
    best_slack: float
    mixed_slack: float | None
    witness: list[int] | None


class SolveResponse(BaseModel):
    dstar: float
    phat: float | None
    gap: float | None
    slater: SlaterInfo
    diverged: bool
    converged: bool
    exact: bool
    iterations: int
    trajectory: list[DualIterRow] | None = None


class OracleRequest(BaseModel):
    config: str
    level: int | None = None


class OracleResponse(BaseModel):
    pstar: float | None
    argmin: list[int] | None
    feasible: bool | None
    dstar_grid: float | None
    mixed: float | None
    rel_gap: float | None
    notes: list[str]


class SweepRequest(BaseModel):
    config: str
    levels: list[int] | None = None
    dual_only: bool = False


class SweepRowModel(BaseModel):
    n: int
    pstar: float | None
    dstar: float | None
    mixed: float | None
    rel_gap: float | None
    pstar_source: str
    note: str


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]


class AxiomsRequest(BaseModel):
    specs: list[str] | None = None
    trials: int = Field(default=1000, ge=1)
    seed: int = 0


class AxiomRow(BaseModel):
    spec: str
    coherent: bool
    convexity: float
    homogeneity: float
    monotonicity: float | None
    translation: float | None


class AxiomsResponse(BaseModel):
    rows: list[AxiomRow]


class LossParseRequest(BaseModel):
    expr: str
    action: list[float] | None = None
    y: float | None = None


class LossParseResponse(BaseModel):
    ok: bool
    rendered: str | None = None
    value: float | None = None
    error: str | None = None
    line: int | None = None
    col: int | None = None


class ErrorDetail(BaseModel):
    message: str
    line: int | None = None
    col: int | None = None
