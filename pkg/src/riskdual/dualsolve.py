"""Lagrangian dual machinery.

The dual function

    q(lam) = min_policy  term_0 + sum_i lam_i * (term_i - c_i)

decomposes scenario-by-scenario once every CVaR outer term is written in its
variational form: for a fixed vector of CVaR anchors ``t`` the Lagrangian is
a per-scenario sum, so the inner minimization is a pointwise argmin over grid
actions.  For a fixed policy the optimal anchor of each CVaR term is one of
that term's table values, and the two minimizations commute; enumerating the
Cartesian product of the distinct table values per CVaR term therefore
yields ``q`` exactly.  When the product exceeds ``anchor_cap`` the solver
falls back to cyclic coordinate descent over anchors from seeded random
starts and flags the value inexact (an inexact value can only overestimate
``q``).

``dual_ascent`` maximizes ``q`` by projected supergradient steps
``lam <- max(0, lam + step0/sqrt(k+1) * g)`` where ``g_i`` is the constraint
slack at the current Lagrangian minimizer (a valid supergradient because
``q`` is a pointwise minimum of functions affine in ``lam``).

``bisect_dual_m1`` handles the single-constraint case: geometric growth of
the search interval followed by golden-section search on the concave ``q``,
then, when all outer functionals are expectations (piecewise-linear ``q``),
an exact refinement over the finitely many slopes-crossing candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DualDivergence,
    NotSingleConstraint,
    UnsupportedOuter,
    ValidationError,
)
from .problem import RCL0Tables, Policy, policy_values

SOLVER_OUTERS = ("expectation", "cvar")


@dataclass(frozen=True)
class Multipliers:
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=float))
        self.lam.setflags(write=False)
        if np.any(self.lam < 0.0) or not np.all(np.isfinite(self.lam)):
            raise ValidationError("multipliers must be finite and nonnegative")


@dataclass(frozen=True)
class AnchorVector:
    """One variational anchor per CVaR outer term (term 0 is the objective)."""

    terms: tuple[int, ...]
    values: tuple[float, ...]


@dataclass(frozen=True)
class DualValue:
    q: float
    minimizer: Policy
    anchors: AnchorVector
    exact: bool


@dataclass(frozen=True)
class DualReport:
    """Trajectory and outcome of a dual-ascent run.

    ``dstar <= best_feasible + 1e-9`` whenever ``exact`` and a feasible policy
    was found (weak duality); an inexact anchor fallback may overestimate
    individual ``q`` values.
    """

    trajectory: tuple[tuple[tuple[float, ...], float], ...]
    feasible_by_iter: tuple[float | None, ...]
    dstar: float
    lambda_best: tuple[float, ...]
    best_feasible: float | None
    best_policy: Policy | None
    gap: float | None
    iterations: int
    converged: bool
    diverged: bool
    exact: bool


def _check_outers(t: RCL0Tables) -> None:
    for i, spec in enumerate(t.outer):
        if spec.kind not in SOLVER_OUTERS:
            raise UnsupportedOuter(
                f"term {i} has outer {spec.kind!r}; the dual solver supports "
                f"{SOLVER_OUTERS} (use the brute-force oracle for the rest)"
            )


def dual_function(
    t: RCL0Tables,
    lam: Sequence[float] | Multipliers,
    anchor_cap: int = 100_000,
    seed: int = 0,
) -> DualValue:
    """Evaluate ``q(lam)`` with its minimizing policy and CVaR anchors."""
    mult = lam if isinstance(lam, Multipliers) else Multipliers(lam=np.asarray(lam, dtype=float))
    if mult.lam.shape[0] != t.m:
        raise ValidationError(f"expected {t.m} multipliers, got {mult.lam.shape[0]}")
    _check_outers(t)

    n, a = t.n_scenarios, t.n_actions
    coefs = np.concatenate([[1.0], mult.lam])
    offset = -float(mult.lam @ t.thresholds)

    base = np.zeros((n, a), dtype=float)
    cvar_terms: list[tuple[int, float, float, np.ndarray, np.ndarray]] = []
    anchor_terms: list[int] = []
    for i, spec in enumerate(t.outer):
        if spec.kind == "cvar":
            anchor_terms.append(i)
        if coefs[i] == 0.0:
            continue
        q_i = t.scenario_probs(i)
        entries = t.tables[i].entries
        if spec.kind == "expectation":
            base += coefs[i] * q_i[:, None] * entries
        else:
            cvar_terms.append((i, float(coefs[i]), spec.alpha, q_i, entries))

    if not cvar_terms:
        pol = np.argmin(base, axis=1)
        q = float(base.min(axis=1).sum()) + offset
        anchors = AnchorVector(
            terms=tuple(anchor_terms),
            values=tuple(float(t.tables[i].entries.min()) for i in anchor_terms),
        )
        return DualValue(q=q, minimizer=Policy(choice=tuple(int(v) for v in pol)), anchors=anchors, exact=True)

    values = [np.unique(entries) for (_, _, _, _, entries) in cvar_terms]
    hinges = []
    consts = []
    for (i, coef, alpha, q_i, entries), vals in zip(cvar_terms, values):
        h = (coef / alpha) * q_i[None, :, None] * np.maximum(
            entries[None, :, :] - vals[:, None, None], 0.0
        )
        hinges.append(h)
        consts.append(coef * vals)

    sizes = tuple(len(v) for v in values)
    total = int(np.prod(sizes))
    if total <= anchor_cap:
        best_flat = _enumerate_anchors(base, hinges, consts, sizes, total, offset)
        exact = True
    else:
        best_flat = _descend_anchors(base, hinges, consts, sizes, offset, seed)
        exact = False

    idx = np.unravel_index(best_flat, sizes)
    cost = base.copy()
    const_sum = offset
    for d, h in enumerate(hinges):
        cost += h[idx[d]]
        const_sum += consts[d][idx[d]]
    pol = np.argmin(cost, axis=1)
    q = float(cost.min(axis=1).sum()) + const_sum
    anchor_values = {i: float(values[d][idx[d]]) for d, (i, *_rest) in enumerate(cvar_terms)}
    anchors = AnchorVector(
        terms=tuple(anchor_terms),
        values=tuple(
            anchor_values.get(i, float(t.tables[i].entries.min())) for i in anchor_terms
        ),
    )
    return DualValue(
        q=q, minimizer=Policy(choice=tuple(int(v) for v in pol)), anchors=anchors, exact=exact
    )


def _enumerate_anchors(base, hinges, consts, sizes, total, offset) -> int:
    n, a = base.shape
    chunk = max(1, int(2_000_000 / max(1, n * a)))
    best_q = math.inf
    best_flat = 0
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        multi = np.unravel_index(flat, sizes)
        cost = np.broadcast_to(base, (flat.shape[0], n, a)).copy()
        const = np.full(flat.shape[0], offset)
        for d, h in enumerate(hinges):
            cost += h[multi[d]]
            const += consts[d][multi[d]]
        qs = cost.min(axis=2).sum(axis=1) + const
        k = int(np.argmin(qs))
        if qs[k] < best_q:
            best_q = float(qs[k])
            best_flat = start + k
    return best_flat


def _descend_anchors(base, hinges, consts, sizes, offset, seed) -> int:
    # Cyclic coordinate descent over anchor values, 5 seeded restarts.
    rng = np.random.default_rng(seed)
    dims = len(sizes)

    def q_of(idx: list[int]) -> float:
        cost = base.copy()
        const = offset
        for d, h in enumerate(hinges):
            cost += h[idx[d]]
            const += consts[d][idx[d]]
        return float(cost.min(axis=1).sum()) + const

    best_q = math.inf
    best_idx: list[int] = [0] * dims
    for _ in range(5):
        idx = [int(rng.integers(s)) for s in sizes]
        cur = q_of(idx)
        improved = True
        while improved:
            improved = False
            for d in range(dims):
                rest = base.copy()
                const_rest = offset
                for e, h in enumerate(hinges):
                    if e == d:
                        continue
                    rest += h[idx[e]]
                    const_rest += consts[e][idx[e]]
                cand = rest[None, :, :] + hinges[d]
                qs = cand.min(axis=2).sum(axis=1) + const_rest + consts[d]
                k = int(np.argmin(qs))
                if qs[k] < cur - 1e-15:
                    cur = float(qs[k])
                    idx[d] = k
                    improved = True
        if cur < best_q:
            best_q = cur
            best_idx = idx
    return int(np.ravel_multi_index(tuple(best_idx), sizes))


def dual_ascent(
    t: RCL0Tables,
    step0: float = 1.0,
    iters: int = 500,
    seed: int = 0,
    anchor_cap: int = 100_000,
    feas_tol: float = 1e-9,
) -> DualReport:
    """Projected supergradient ascent from ``lam = 0``; deterministic given the seed."""
    if step0 <= 0.0 or iters < 1:
        raise ValidationError("step0 must be positive and iters >= 1")
    _check_outers(t)
    m = t.m
    lam = np.zeros(m, dtype=float)
    trajectory: list[tuple[tuple[float, ...], float]] = []
    best_q = -math.inf
    best_lam = lam.copy()
    best_feasible: float | None = None
    best_policy: Policy | None = None
    min_slack = np.full(m, math.inf)
    exact = True
    q_values: list[float] = []
    feasible_by_iter: list[float | None] = []

    for k in range(iters):
        dv = dual_function(t, lam, anchor_cap=anchor_cap, seed=seed)
        exact = exact and dv.exact
        trajectory.append((tuple(float(v) for v in lam), dv.q))
        q_values.append(dv.q)
        if dv.q > best_q:
            best_q = dv.q
            best_lam = lam.copy()
        obj, cons = policy_values(t, dv.minimizer.choice)
        g = cons - t.thresholds
        min_slack = np.minimum(min_slack, g)
        if np.all(g <= feas_tol) and (best_feasible is None or obj < best_feasible):
            best_feasible = obj
            best_policy = dv.minimizer
        feasible_by_iter.append(best_feasible)
        lam = np.maximum(0.0, lam + (step0 / math.sqrt(k + 1.0)) * g)

    half = iters // 2
    rising_tail = bool(q_values[-1] > q_values[half] + 1e-9 * (1.0 + abs(q_values[-1])))
    diverged = best_feasible is None and bool(np.any(min_slack > 0.0)) and rising_tail
    quarter = max(1, (3 * iters) // 4)
    early_best = max(q_values[:quarter])
    converged = bool((not diverged) and (best_q - early_best) <= 1e-9 * (1.0 + abs(best_q)))
    return DualReport(
        trajectory=tuple(trajectory),
        feasible_by_iter=tuple(feasible_by_iter),
        dstar=best_q,
        lambda_best=tuple(float(v) for v in best_lam),
        best_feasible=best_feasible,
        best_policy=best_policy,
        gap=None if best_feasible is None else best_feasible - best_q,
        iterations=iters,
        converged=converged,
        diverged=diverged,
        exact=exact,
    )


def bisect_dual_m1(
    t: RCL0Tables,
    tol: float = 1e-9,
    anchor_cap: int = 100_000,
    lam_cap: float = 1e12,
) -> tuple[float, float]:
    """Maximize ``q`` over a single multiplier; returns ``(Dstar, lambda_star)``.

    Raises :class:`DualDivergence` when ``q`` keeps increasing past
    ``lam_cap`` (the instance is infeasible).
    """
    if t.m != 1:
        raise NotSingleConstraint(f"bisect_dual_m1 needs m = 1, got m = {t.m}")
    if tol <= 0.0:
        raise ValidationError("tol must be positive")
    _check_outers(t)

    def q_of(lam: float) -> float:
        return dual_function(t, [lam], anchor_cap=anchor_cap).q

    hi = 1.0
    while q_of(hi) > q_of(hi / 2.0):
        hi *= 2.0
        if hi > lam_cap:
            raise DualDivergence(
                f"dual value still increasing at lambda = {hi:g}; instance looks infeasible"
            )

    lo = 0.0
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = q_of(x1), q_of(x2)
    width_target = tol * max(1.0, hi)
    while hi - lo > width_target:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = q_of(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = q_of(x1)
    lam_best = x1 if f1 >= f2 else x2
    q_best = max(f1, f2)

    if all(spec.kind == "expectation" for spec in t.outer):
        for lam in _vertex_candidates(t, 0.0, max(hi, lam_best)):
            qv = q_of(lam)
            if qv > q_best:
                q_best, lam_best = qv, lam
    return q_best, lam_best


def _vertex_candidates(t: RCL0Tables, lo: float, hi: float, cap: int = 20_000) -> list[float]:
    # Breakpoints of the piecewise-linear q: multipliers where two actions tie
    # in some scenario.  Exact maximization support for expectation outers.
    b = t.scenario_probs(0)[:, None] * t.tables[0].entries
    d = t.scenario_probs(1)[:, None] * t.tables[1].entries
    out = [lo]
    n, a = b.shape
    for j in range(n):
        for a1 in range(a):
            for a2 in range(a1 + 1, a):
                dd = d[j, a2] - d[j, a1]
                if dd == 0.0:
                    continue
                lam = (b[j, a1] - b[j, a2]) / dd
                if lo <= lam <= hi:
                    out.append(float(lam))
                if len(out) > cap:
                    return out
    return out
