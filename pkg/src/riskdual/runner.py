"""Run orchestration shared by the CLI and the HTTP service.

Each entry point takes a parsed :class:`~riskdual.configio.RunSetup` (or raw
config text, for the process-parallel sweep) and returns plain row/summary
structures; CSV writers render them deterministically with 17 significant
digits.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .configio import RunSetup, load_setup
from .dualsolve import DualReport, bisect_dual_m1, dual_ascent
from .errors import (
    BudgetExceeded,
    DualDivergence,
    GridDimensionExceeded,
    NotSupported,
    RiskDualError,
)
from .oracle import (
    BrutePrimal,
    MixedPrimal,
    brute_primal,
    grid_dual,
    mixed_primal_m1,
    round_mixed,
)
from .problem import RCL0Tables, SlaterReport, check_slater, lower
from .riskcore import axiom_report, format_risk_spec, parse_risk_spec

REL_GAP_FLOOR = 1e-12


def fmt(value) -> str:
    if value is None:
        return ""
    return f"{float(value):.17g}"


def rel_gap(pstar: float | None, dstar: float | None) -> float | None:
    if pstar is None or dstar is None:
        return None
    return (pstar - dstar) / max(abs(pstar), REL_GAP_FLOOR)


# --- solve -----------------------------------------------------------------------

@dataclass
class SolveOutcome:
    report: DualReport
    slater: SlaterReport
    m: int

    @property
    def slater_flag(self) -> str:
        if self.slater.found:
            return "ok"
        return "violated" if self.slater.conclusive else "inconclusive"

    def dual_rows(self) -> list[dict]:
        rows = []
        best_q = None
        for k, ((lam, q), feas) in enumerate(
            zip(self.report.trajectory, self.report.feasible_by_iter)
        ):
            best_q = q if best_q is None else max(best_q, q)
            row = {"iter": k}
            for i, v in enumerate(lam, start=1):
                row[f"lambda_{i}"] = v
            row["q"] = q
            row["best_feasible"] = feas
            row["gap"] = None if feas is None else feas - best_q
            rows.append(row)
        return rows

    def summary(self) -> dict:
        return {
            "dstar": self.report.dstar,
            "phat": self.report.best_feasible,
            "gap": self.report.gap,
            "slater": self.slater_flag,
            "diverged": self.report.diverged,
            "converged": self.report.converged,
            "iterations": self.report.iterations,
            "exact": self.report.exact,
        }


def solve(
    setup: RunSetup,
    level: int | None = None,
    step0: float | None = None,
    iters: int | None = None,
    seed: int | None = None,
    anchor_cap: int | None = None,
) -> SolveOutcome:
    instance = setup.instance(level)
    tables = lower(instance)
    slater = check_slater(
        tables,
        margin=setup.solver.slater_margin,
        max_policies=min(setup.budget.max_policies, 100_000),
    )
    report = dual_ascent(
        tables,
        step0=step0 if step0 is not None else setup.solver.step0,
        iters=iters if iters is not None else setup.solver.iters,
        seed=seed if seed is not None else setup.solver.seed,
        anchor_cap=anchor_cap if anchor_cap is not None else setup.solver.anchor_cap,
    )
    return SolveOutcome(report=report, slater=slater, m=tables.m)


# --- oracle ----------------------------------------------------------------------

@dataclass
class OracleOutcome:
    pstar: float | None
    argmin: tuple[int, ...] | None
    feasible: bool | None        # None when enumeration exceeded the budget
    dstar_grid: float | None
    mixed: float | None
    notes: tuple[str, ...]

    def row(self) -> dict:
        return {
            "pstar": self.pstar,
            "dstar_grid": self.dstar_grid,
            "mixed": self.mixed,
            "rel_gap": rel_gap(self.pstar, self.dstar_grid),
        }


def oracle(setup: RunSetup, level: int | None = None) -> OracleOutcome:
    tables = lower(setup.instance(level))
    notes: list[str] = []
    pstar = None
    argmin = None
    feasible: bool | None = None
    try:
        res: BrutePrimal = brute_primal(tables, setup.budget)
        feasible = res.feasible
        if res.feasible:
            pstar = res.pstar
            argmin = res.argmin.choice
        else:
            notes.append("infeasible")
    except BudgetExceeded as exc:
        notes.append(str(exc))
    dstar = None
    try:
        dstar = grid_dual(tables, setup.budget)
    except (GridDimensionExceeded, DualDivergence) as exc:
        notes.append(str(exc))
    mixed_value = None
    try:
        mixed_value = mixed_primal_m1(tables).value
    except (NotSupported, DualDivergence):
        pass
    return OracleOutcome(
        pstar=pstar,
        argmin=argmin,
        feasible=feasible,
        dstar_grid=dstar,
        mixed=mixed_value,
        notes=tuple(notes),
    )


# --- sweep -----------------------------------------------------------------------

@dataclass
class SweepRow:
    n: int
    pstar: float | None
    dstar: float | None
    mixed: float | None
    rel_gap: float | None
    pstar_source: str      # "brute", "rounded" or ""
    note: str = ""

    def row(self) -> dict:
        return {
            "n": self.n,
            "Pstar": self.pstar,
            "Dstar": self.dstar,
            "mixed": self.mixed,
            "rel_gap": self.rel_gap,
        }


def sweep_level(config_text: str, n: int, dual_only: bool = False) -> SweepRow:
    setup = load_setup(config_text)
    tables: RCL0Tables = lower(setup.instance(n))
    note = ""
    dstar = None
    try:
        if tables.m == 1:
            dstar, _ = bisect_dual_m1(tables, tol=1e-9, anchor_cap=setup.solver.anchor_cap)
        else:
            dstar = grid_dual(tables, setup.budget)
    except (GridDimensionExceeded, DualDivergence) as exc:
        note = str(exc)

    mixed_value = None
    mixed_result: MixedPrimal | None = None
    try:
        mixed_result = mixed_primal_m1(tables)
        mixed_value = mixed_result.value
    except (NotSupported, DualDivergence):
        pass

    pstar = None
    source = ""
    if not dual_only:
        try:
            res = brute_primal(tables, setup.budget)
            if res.feasible:
                pstar = res.pstar
                source = "brute"
            else:
                note = (note + "; " if note else "") + "infeasible"
        except BudgetExceeded:
            if mixed_result is not None:
                pstar, _ = round_mixed(tables, mixed_result.mix)
                source = "rounded"
            else:
                note = (note + "; " if note else "") + "primal budget exceeded"
    return SweepRow(
        n=n,
        pstar=pstar,
        dstar=dstar,
        mixed=mixed_value,
        rel_gap=rel_gap(pstar, dstar),
        pstar_source=source,
        note=note,
    )


def sweep(
    config_text: str,
    levels: tuple[int, ...] | None = None,
    dual_only: bool = False,
    jobs: int = 1,
) -> list[SweepRow]:
    setup = load_setup(config_text)
    if setup.family is None:
        raise RiskDualError("sweep requires a density-based config (a [base] with 'density')")
    use_levels = levels if levels else setup.sweep_levels
    if not use_levels:
        raise RiskDualError("no sweep levels configured (add a [sweep] section or pass levels)")
    if jobs <= 1 or len(use_levels) == 1:
        return [sweep_level(config_text, n, dual_only) for n in use_levels]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(sweep_level, config_text, n, dual_only) for n in use_levels]
        return [f.result() for f in futures]


# --- axioms ----------------------------------------------------------------------

DEFAULT_AXIOM_SPECS = (
    "expectation",
    "cvar:0.05",
    "cvar:0.3",
    "cvar:0.7",
    "cvar:1",
    "mad:0",
    "mad:0.5",
    "musd:0:1",
    "musd:0:2",
    "musd:1:1",
    "musd:1:2",
)


def axioms(specs: tuple[str, ...] | None = None, trials: int = 1000, seed: int = 0) -> list[dict]:
    rows = []
    for text in specs or DEFAULT_AXIOM_SPECS:
        spec = parse_risk_spec(text)
        rep = axiom_report(spec, trials=trials, seed=seed)
        rows.append(
            {
                "spec": format_risk_spec(spec),
                "coherent": rep.coherent,
                "convexity": rep.convexity,
                "homogeneity": rep.homogeneity,
                "monotonicity": rep.monotonicity,
                "translation": rep.translation,
                "trials": trials,
                "seed": seed,
            }
        )
    return rows


# --- CSV emission ------------------------------------------------------------------

def write_dual_csv(path, outcome: SolveOutcome) -> None:
    header = ["iter"] + [f"lambda_{i}" for i in range(1, outcome.m + 1)] + [
        "q",
        "best_feasible",
        "gap",
    ]
    rows = outcome.dual_rows()
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([str(row["iter"])] + [fmt(row[h]) for h in header[1:]])


def write_sweep_csv(path, rows: list[SweepRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n", "Pstar", "Dstar", "mixed", "rel_gap"])
        for row in rows:
            writer.writerow(
                [str(row.n), fmt(row.pstar), fmt(row.dstar), fmt(row.mixed), fmt(row.rel_gap)]
            )


def write_axioms_csv(path, rows: list[dict]) -> None:
    header = ["spec", "coherent", "convexity", "homogeneity", "monotonicity", "translation"]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    row["spec"],
                    str(row["coherent"]).lower(),
                    fmt(row["convexity"]),
                    fmt(row["homogeneity"]),
                    fmt(row["monotonicity"]),
                    fmt(row["translation"]),
                ]
            )


def write_oracle_csv(path, outcome: OracleOutcome) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["pstar", "dstar_grid", "mixed", "rel_gap"])
        row = outcome.row()
        writer.writerow([fmt(row["pstar"]), fmt(row["dstar_grid"]), fmt(row["mixed"]), fmt(row["rel_gap"])])
