"""Brute-force reference optimizers.

These are deliberately dumb: exhaustive policy enumeration for the primal,
a multiplier grid (plus single-constraint bisection) for the dual, and an
explicit single-scenario randomization for the convexified single-constraint
case.  Every headline number produced by the solver is checked against these.

Enumeration is evaluated in vectorized chunks for speed; the batch evaluator
computes exactly the same per-policy values as
:func:`riskdual.problem.policy_values` (the test suite pins the two routes
against each other).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dualsolve import bisect_dual_m1, dual_function
from .errors import BudgetExceeded, GridDimensionExceeded, NotSupported, ValidationError
from .problem import (
    MixedPolicy,
    Policy,
    RCL0Tables,
    mixed_policy_values,
    one_hot,
    policy_values,
)
from .riskcore import R_FUNCTIONS, RiskSpec

FEASIBILITY_TOL = 1e-9

_CHUNK = 8192


@dataclass(frozen=True)
class OracleBudget:
    """Enumeration and grid limits for the reference optimizers."""

    max_policies: int = 1_000_000
    lambda_grid: tuple[float, float, float] = (0.0, 3.0, 1e-3)

    def __post_init__(self):
        lo, hi, step = self.lambda_grid
        if self.max_policies < 1 or step <= 0.0 or hi < lo:
            raise ValidationError("oracle budget must be positive with a nonempty lambda grid")


@dataclass(frozen=True)
class BrutePrimal:
    """Exhaustive primal outcome; ``feasible`` is False when no policy qualifies."""

    feasible: bool
    pstar: float | None
    argmin: Policy | None


def _risk_batch(spec: RiskSpec, Z: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise risk of cost matrix ``Z`` (policies x scenarios) under probs ``q``."""
    if spec.kind == "expectation":
        return Z @ q
    if spec.kind == "cvar":
        order = np.argsort(Z, axis=1, kind="stable")
        zs = np.take_along_axis(Z, order, axis=1)
        qs = np.broadcast_to(q, Z.shape)
        qs = np.take_along_axis(qs, order, axis=1)
        suffix_q = np.zeros_like(qs)
        suffix_zq = np.zeros_like(qs)
        if Z.shape[1] > 1:
            suffix_q[:, :-1] = np.cumsum(qs[:, 1:][:, ::-1], axis=1)[:, ::-1]
            suffix_zq[:, :-1] = np.cumsum((qs[:, 1:] * zs[:, 1:])[:, ::-1], axis=1)[:, ::-1]
        f = zs + (suffix_zq - zs * suffix_q) / spec.alpha
        return f.min(axis=1)
    m = Z @ q
    centered = Z - m[:, None]
    if spec.kind == "mad":
        return m + spec.c * (np.abs(centered) @ q)
    if spec.kind == "musd":
        dev = np.maximum(centered, 0.0) ** spec.order
        return m + spec.c * (dev @ q) ** (1.0 / spec.order)
    dev = R_FUNCTIONS[spec.rfun](centered) ** spec.order
    return m + spec.c * (dev @ q) ** (1.0 / spec.order)


def _policy_chunks(n: int, a: int, total: int):
    # Lexicographic enumeration: scenario 0 is the most significant digit.
    powers = np.array([a ** (n - 1 - j) for j in range(n)], dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        yield start, (idx[:, None] // powers[None, :]) % a


def brute_primal(t: RCL0Tables, budget: OracleBudget = OracleBudget()) -> BrutePrimal:
    """Enumerate all deterministic policies lexicographically; keep the first optimum."""
    n, a = t.n_scenarios, t.n_actions
    if float(a) ** n > budget.max_policies:
        raise BudgetExceeded(f"{a}^{n} policies exceed the budget of {budget.max_policies}")
    total = a ** n
    cols = np.arange(n)
    best: float | None = None
    best_index: int | None = None
    for start, P in _policy_chunks(n, a, total):
        feasible = np.ones(P.shape[0], dtype=bool)
        for i in range(1, t.m + 1):
            Z = t.tables[i].entries[cols[None, :], P]
            vals = _risk_batch(t.outer[i], Z, t.scenario_probs(i))
            feasible &= vals <= t.thresholds[i - 1] + FEASIBILITY_TOL
        if not feasible.any():
            continue
        Z0 = t.tables[0].entries[cols[None, :], P]
        obj = _risk_batch(t.outer[0], Z0, t.scenario_probs(0))
        obj = np.where(feasible, obj, np.inf)
        k = int(np.argmin(obj))
        if best is None or obj[k] < best:
            best = float(obj[k])
            best_index = start + k
    if best is None:
        return BrutePrimal(feasible=False, pstar=None, argmin=None)
    digits = tuple(
        int((best_index // a ** (n - 1 - j)) % a) for j in range(n)
    )
    return BrutePrimal(feasible=True, pstar=best, argmin=Policy(choice=digits))


def grid_dual(t: RCL0Tables, budget: OracleBudget = OracleBudget()) -> float:
    """Maximum of the dual function over a multiplier grid (m <= 2).

    For a single constraint the grid maximum is refined by
    :func:`bisect_dual_m1`.  Two-constraint grids are clamped to at most 101
    points per axis (the step is widened if necessary).
    """
    m = t.m
    if m > 2:
        raise GridDimensionExceeded(f"lambda grid search supports m <= 2, got m = {m}")
    lo, hi, step = budget.lambda_grid
    max_per_dim = 100_001 if m == 1 else 101
    count = min(int(math.floor((hi - lo) / step)) + 1, max_per_dim)
    axis = np.linspace(lo, hi, count)
    best = -math.inf
    if m == 1:
        for lam in axis:
            best = max(best, dual_function(t, [lam]).q)
        refined, _ = bisect_dual_m1(t, tol=1e-9)
        return max(best, refined)
    for lam1 in axis:
        for lam2 in axis:
            best = max(best, dual_function(t, [lam1, lam2]).q)
    return best


@dataclass(frozen=True)
class MixedPrimal:
    """Convexified single-constraint optimum: randomize at most one scenario."""

    value: float
    mix: MixedPolicy
    lambda_star: float
    dstar: float


def mixed_primal_m1(t: RCL0Tables, tie_tol: float = 1e-9) -> MixedPrimal:
    """Exact optimum over per-scenario randomized policies (m = 1, expectations).

    At the maximizing multiplier the Lagrangian minimizers form a product of
    per-scenario argmin sets.  Walking from the minimizer with the smallest
    constraint value toward the largest and randomizing on the scenario where
    the constraint threshold is crossed yields a mixture that attains the
    dual value exactly and satisfies the constraint with equality (or a
    deterministic minimizer when the constraint is slack).
    """
    if t.m != 1:
        raise NotSupported(f"mixed oracle requires m = 1, got m = {t.m}")
    if any(spec.kind != "expectation" for spec in t.outer):
        raise NotSupported("mixed oracle requires expectation outer functionals")

    dstar, lam_star = bisect_dual_m1(t, tol=1e-10)
    n, a = t.n_scenarios, t.n_actions
    c = float(t.thresholds[0])
    base = t.scenario_probs(0)[:, None] * t.tables[0].entries
    con = t.scenario_probs(1)[:, None] * t.tables[1].entries
    lagr = base + lam_star * con

    rows_lo = np.empty(n, dtype=int)
    rows_hi = np.empty(n, dtype=int)
    for j in range(n):
        row = lagr[j]
        cutoff = row.min() + tie_tol * (1.0 + abs(row.min()))
        ties = np.flatnonzero(row <= cutoff)
        rows_lo[j] = ties[np.argmin(con[j, ties])]
        rows_hi[j] = ties[np.argmax(con[j, ties])]

    cum = float(con[np.arange(n), rows_lo].sum())
    if cum > c + 1e-7 * (1.0 + abs(c)):
        raise NotSupported(
            "no Lagrangian minimizer satisfies the constraint; the instance looks infeasible"
        )

    rows = one_hot(rows_lo, a).rows.copy()
    current = rows_lo.copy()
    for j in range(n):
        if rows_hi[j] == current[j]:
            continue
        delta = float(con[j, rows_hi[j]] - con[j, current[j]])
        if cum + delta <= c + 1e-15:
            cum += delta
            current[j] = rows_hi[j]
            rows[j] = 0.0
            rows[j, current[j]] = 1.0
        else:
            theta = (c - cum) / delta
            rows[j] = 0.0
            rows[j, current[j]] = 1.0 - theta
            rows[j, rows_hi[j]] = theta
            break

    mix = MixedPolicy(rows=rows)
    value, _ = mixed_policy_values(t, mix)
    return MixedPrimal(value=value, mix=mix, lambda_star=lam_star, dstar=dstar)


def round_mixed(t: RCL0Tables, mix: MixedPolicy) -> tuple[float, Policy]:
    """Deterministic rounding of a mixture: randomized scenarios take the action
    with the smallest total constraint contribution, keeping feasibility."""
    n = t.n_scenarios
    con_total = np.zeros((n, t.n_actions), dtype=float)
    for i in range(1, t.m + 1):
        con_total += t.scenario_probs(i)[:, None] * t.tables[i].entries
    choice = np.empty(n, dtype=int)
    for j in range(n):
        support = np.flatnonzero(mix.rows[j] > 0.0)
        choice[j] = support[np.argmin(con_total[j, support])]
    obj, _ = policy_values(t, choice)
    return obj, Policy(choice=tuple(int(v) for v in choice))
