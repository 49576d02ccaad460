"""Shared fuzz generators and independent reference computations."""

from __future__ import annotations

import math

import numpy as np

from riskdual.condrisk import CostTable, build_grid
from riskdual.problem import RCL0Tables
from riskdual.riskcore import RiskSpec, cvar, expectation, mad, musd, risk_value
from riskdual.scenario import DiscreteMarginal, WeightVector, build_marginal


def random_marginal(rng: np.random.Generator, n: int) -> DiscreteMarginal:
    points = np.sort(rng.choice(np.arange(10 * n), size=n, replace=False)).astype(float)
    probs = rng.uniform(0.1, 1.0, n)
    probs /= probs.sum()
    return build_marginal(points, probs)


def random_weights(
    rng: np.random.Generator, base: DiscreteMarginal, allow_zero: bool = True
) -> WeightVector:
    n = base.size
    if allow_zero and rng.uniform() < 0.3 and n > 1:
        keep = rng.uniform(size=n) > 0.4
        if not keep.any():
            keep[int(rng.integers(n))] = True
        q = np.where(keep, rng.uniform(0.1, 1.0, n), 0.0)
    else:
        q = rng.uniform(0.1, 1.0, n)
    q /= q.sum()
    return WeightVector(w=q / base.probs)


def random_outer(rng: np.random.Generator, kinds=("expectation", "cvar")) -> RiskSpec:
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "expectation":
        return expectation()
    if kind == "cvar":
        return cvar(float(rng.uniform(0.2, 1.0)))
    if kind == "mad":
        return mad(float(rng.uniform(0.0, 0.5)))
    return musd(float(rng.uniform(0.0, 1.0)), float(rng.choice([1.0, 2.0])))


def random_tables(
    rng: np.random.Generator,
    n_max: int = 5,
    a_max: int = 4,
    m_max: int = 2,
    outer_kinds=("expectation", "cvar"),
    max_cvar_terms: int | None = None,
    allow_zero_weights: bool = True,
) -> RCL0Tables:
    """Slater-feasible random lowered instance (thresholds carry positive slack)."""
    n = int(rng.integers(2, n_max + 1))
    a = int(rng.integers(2, a_max + 1))
    m = int(rng.integers(1, m_max + 1))
    base = random_marginal(rng, n)
    weights, tables, outers = [], [], []
    n_cvar = 0
    for i in range(m + 1):
        weights.append(random_weights(rng, base, allow_zero=allow_zero_weights))
        tables.append(CostTable(entries=rng.uniform(0.0, 4.0, (n, a))))
        spec = random_outer(rng, outer_kinds)
        if spec.kind == "cvar" and max_cvar_terms is not None and n_cvar >= max_cvar_terms:
            spec = expectation()
        if spec.kind == "cvar":
            n_cvar += 1
        outers.append(spec)
    # anchor a random policy so the instance is jointly (and strictly) feasible
    anchor = rng.integers(0, a, n)
    thresholds = []
    for i in range(1, m + 1):
        q = base.probs * weights[i].w
        z = tables[i].entries[np.arange(n), anchor]
        at_anchor = risk_value(outers[i], z, q)
        spread = float(tables[i].entries.max() - tables[i].entries.min())
        thresholds.append(at_anchor + rng.uniform(0.05, 0.9) * max(spread, 0.2))
    return RCL0Tables(
        base=base,
        weights=tuple(weights),
        tables=tuple(tables),
        outer=tuple(outers),
        thresholds=np.asarray(thresholds),
        grid=build_grid(np.arange(a, dtype=float)),
    )


# --- independent references --------------------------------------------------------

def cvar_grid_reference(z, probs, alpha: float, resolution: int = 200_001) -> float:
    """CVaR by brute-force minimization of t + E[(z-t)_+]/alpha over a fine t grid."""
    z = np.asarray(z, dtype=float)
    probs = np.asarray(probs, dtype=float)
    ts = np.linspace(z.min(), z.max(), resolution)
    vals = ts + (np.maximum(z[None, :] - ts[:, None], 0.0) @ probs) / alpha
    return float(vals.min())


def risk_reference(spec: RiskSpec, z, probs) -> float:
    """Plain-Python reference evaluation (no numpy reductions)."""
    pairs = [(float(v), float(q)) for v, q in zip(z, probs)]
    if spec.kind == "expectation":
        return sum(v * q for v, q in pairs)
    if spec.kind == "cvar":
        best = math.inf
        for t, _ in pairs:
            best = min(best, t + sum(q * max(v - t, 0.0) for v, q in pairs) / spec.alpha)
        return best
    mean = sum(v * q for v, q in pairs)
    if spec.kind == "mad":
        return mean + spec.c * sum(q * abs(v - mean) for v, q in pairs)
    if spec.kind == "musd":
        dev = sum(q * max(v - mean, 0.0) ** spec.order for v, q in pairs)
        return mean + spec.c * dev ** (1.0 / spec.order)
    raise NotImplementedError(spec.kind)


def brute_lagrangian_min(t: RCL0Tables, lam) -> float:
    """Exhaustive Lagrangian minimum via per-policy exact risk evaluation."""
    from itertools import product

    from riskdual.problem import policy_values

    lam = np.asarray(lam, dtype=float)
    best = math.inf
    for pol in product(range(t.n_actions), repeat=t.n_scenarios):
        obj, cons = policy_values(t, pol)
        best = min(best, obj + float(lam @ (cons - t.thresholds)))
    return best
