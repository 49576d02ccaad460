"""FastAPI application exposing solve / oracle / sweep / axioms endpoints.

Config documents travel as text in the request body; validation failures map
to 422 responses carrying the document position of the offending value.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import runner
from ..configio import load_setup
from ..errors import ConfigError, DualDivergence, LossExprError, RiskDualError
from ..lossexpr import evaluate as expr_evaluate
from ..lossexpr import parse_loss_expr, to_text
from .schemas import (
    AxiomRow,
    AxiomsRequest,
    AxiomsResponse,
    DualIterRow,
    LossParseRequest,
    LossParseResponse,
    OracleRequest,
    OracleResponse,
    SlaterInfo,
    SolveRequest,
    SolveResponse,
    SweepRequest,
    SweepResponse,
    SweepRowModel,
)


def _config_422(exc: ConfigError) -> HTTPException:
    return HTTPException(
        status_code=422,
        detail={"message": exc.message, "line": exc.line, "col": exc.col},
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="riskdual",
        description=(
            "Risk-constrained policy selection on finite scenario models: "
            "dual solver, brute-force oracles and refinement sweeps."
        ),
    )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/solve", response_model=SolveResponse)
    def solve(req: SolveRequest) -> SolveResponse:
        try:
            setup = load_setup(req.config)
            outcome = runner.solve(
                setup,
                level=req.level,
                step0=req.step0,
                iters=req.iters,
                seed=req.seed,
                anchor_cap=req.anchor_cap,
            )
        except ConfigError as exc:
            raise _config_422(exc) from exc
        except RiskDualError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        slater = outcome.slater
        trajectory = None
        if req.include_trajectory:
            trajectory = [
                DualIterRow(
                    iter=row["iter"],
                    lam=[row[f"lambda_{i}"] for i in range(1, outcome.m + 1)],
                    q=row["q"],
                    best_feasible=row["best_feasible"],
                    gap=row["gap"],
                )
                for row in outcome.dual_rows()
            ]
        return SolveResponse(
            dstar=outcome.report.dstar,
            phat=outcome.report.best_feasible,
            gap=outcome.report.gap,
            slater=SlaterInfo(
                flag=outcome.slater_flag,
                found=slater.found,
                conclusive=slater.conclusive,
                best_slack=slater.best_slack,
                mixed_slack=slater.mixed_slack,
                witness=list(slater.witness.choice) if slater.witness else None,
            ),
            diverged=outcome.report.diverged,
            converged=outcome.report.converged,
            exact=outcome.report.exact,
            iterations=outcome.report.iterations,
            trajectory=trajectory,
        )

    @app.post("/oracle", response_model=OracleResponse)
    def oracle(req: OracleRequest) -> OracleResponse:
        try:
            setup = load_setup(req.config)
            outcome = runner.oracle(setup, level=req.level)
        except ConfigError as exc:
            raise _config_422(exc) from exc
        except RiskDualError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return OracleResponse(
            pstar=outcome.pstar,
            argmin=list(outcome.argmin) if outcome.argmin is not None else None,
            feasible=outcome.feasible,
            dstar_grid=outcome.dstar_grid,
            mixed=outcome.mixed,
            rel_gap=runner.rel_gap(outcome.pstar, outcome.dstar_grid),
            notes=list(outcome.notes),
        )

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        try:
            rows = runner.sweep(
                req.config,
                levels=tuple(req.levels) if req.levels else None,
                dual_only=req.dual_only,
            )
        except ConfigError as exc:
            raise _config_422(exc) from exc
        except DualDivergence as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except RiskDualError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return SweepResponse(
            rows=[
                SweepRowModel(
                    n=row.n,
                    pstar=row.pstar,
                    dstar=row.dstar,
                    mixed=row.mixed,
                    rel_gap=row.rel_gap,
                    pstar_source=row.pstar_source,
                    note=row.note,
                )
                for row in rows
            ]
        )

    @app.post("/axioms", response_model=AxiomsResponse)
    def axioms(req: AxiomsRequest) -> AxiomsResponse:
        try:
            rows = runner.axioms(
                specs=tuple(req.specs) if req.specs else None,
                trials=req.trials,
                seed=req.seed,
            )
        except RiskDualError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return AxiomsResponse(rows=[AxiomRow(**row_fields(row)) for row in rows])

    @app.post("/loss/parse", response_model=LossParseResponse)
    def loss_parse(req: LossParseRequest) -> LossParseResponse:
        try:
            node = parse_loss_expr(req.expr)
        except LossExprError as exc:
            return LossParseResponse(
                ok=False, error=exc.message, line=exc.line, col=exc.col
            )
        value = None
        if req.action is not None and req.y is not None:
            try:
                value = expr_evaluate(node, req.action, req.y)
            except RiskDualError as exc:
                return LossParseResponse(ok=False, rendered=to_text(node), error=str(exc))
        return LossParseResponse(ok=True, rendered=to_text(node), value=value)

    return app


def row_fields(row: dict) -> dict:
    return {
        "spec": row["spec"],
        "coherent": row["coherent"],
        "convexity": row["convexity"],
        "homogeneity": row["homogeneity"],
        "monotonicity": row["monotonicity"],
        "translation": row["translation"],
    }


app = create_app()
