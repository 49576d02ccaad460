"""Scenario-wise inner risk: cost tables of the loss against each label posterior.

At each feature scenario the label distribution is a plain finite
distribution, so the inner risk of the loss is an ordinary risk-functional
evaluation per (scenario, action) pair.  The resulting :class:`CostTable` is
the computational backbone of everything downstream.

:func:`substitution_check` recomputes every table entry through an
independent pure-Python route and reports the worst discrepancy; on finite
models the two traversals must agree to ~1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .losses import LossSpec, loss_values
from .riskcore import RiskSpec, risk_value
from .scenario import JointModel, _as_point


@dataclass(frozen=True)
class ActionGrid:
    """Finite set of candidate action vectors (the per-scenario choice set)."""

    actions: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.actions) == 0:
            raise ValidationError("action grid must be nonempty")
        if len(set(self.actions)) != len(self.actions):
            raise ValidationError("actions must be pairwise distinct")

    @property
    def size(self) -> int:
        return len(self.actions)

    @property
    def dim(self) -> int:
        return len(self.actions[0])


def build_grid(actions: Sequence) -> ActionGrid:
    return ActionGrid(actions=tuple(_as_point(a) for a in actions))


@dataclass(frozen=True)
class CostTable:
    """Matrix of inner risk values, shape (scenarios, actions)."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", np.asarray(self.entries, dtype=float))
        self.entries.setflags(write=False)
        if self.entries.ndim != 2:
            raise ValidationError(f"cost table must be 2-d, got shape {self.entries.shape}")
        if not np.all(np.isfinite(self.entries)):
            raise ValidationError("cost table entries must be finite")

    @property
    def n_scenarios(self) -> int:
        return self.entries.shape[0]

    @property
    def n_actions(self) -> int:
        return self.entries.shape[1]


def inner_cost_table(
    loss: LossSpec, joint: JointModel, grid: ActionGrid, inner: RiskSpec
) -> CostTable:
    """Inner risk of the loss at every (scenario, action) pair.

    ``entries[j][a]`` is the risk of ``loss(action_a, Y)`` under the label
    distribution at scenario ``j``.
    """
    n = joint.size
    entries = np.empty((n, grid.size), dtype=float)
    for j in range(n):
        labels = joint.conditional.labels(j)
        probs = joint.conditional.label_probs(j)
        for a, action in enumerate(grid.actions):
            vals = loss_values(loss, action, labels)
            entries[j, a] = risk_value(inner, vals, probs)
    return CostTable(entries=entries)


# --- independent reference ------------------------------------------------------

def _direct_risk(spec: RiskSpec, pairs: list[tuple[float, float]]) -> float:
    # Pure-Python evaluation on (value, prob) pairs; no numpy, scan-based CVaR.
    if spec.kind == "expectation":
        return sum(v * q for v, q in pairs)
    if spec.kind == "cvar":
        best = math.inf
        for t, _ in pairs:
            cur = t + sum(q * (v - t) for v, q in pairs if v > t) / spec.alpha
            best = min(best, cur)
        return best
    mean = sum(v * q for v, q in pairs)
    if spec.kind == "mad":
        return mean + spec.c * sum(q * abs(v - mean) for v, q in pairs)
    if spec.kind == "musd":
        dev = sum(q * max(v - mean, 0.0) ** spec.order for v, q in pairs)
        return mean + spec.c * dev ** (1.0 / spec.order)
    # gmsd
    def rfun(u: float) -> float:
        if spec.rfun == "abs":
            return abs(u)
        if spec.rfun == "relu":
            return max(u, 0.0)
        return max(u, 0.0) ** 2

    dev = sum(q * rfun(v - mean) ** spec.order for v, q in pairs)
    return mean + spec.c * dev ** (1.0 / spec.order)


def substitution_check(
    loss: LossSpec, joint: JointModel, grid: ActionGrid, inner: RiskSpec
) -> float:
    """Worst discrepancy between the cost table and a direct per-scenario evaluation.

    Builds the table via :func:`inner_cost_table`, then recomputes every entry
    by plugging each action into the label distribution restricted to that
    scenario, using an independent scan-based implementation.  Returns the
    maximum absolute difference.
    """
    table = inner_cost_table(loss, joint, grid, inner)
    worst = 0.0
    for j in range(joint.size):
        labels = joint.conditional.labels(j)
        probs = joint.conditional.label_probs(j)
        for a, action in enumerate(grid.actions):
            vals = loss_values(loss, action, labels)
            pairs = [(float(v), float(q)) for v, q in zip(vals, probs)]
            direct = _direct_risk(inner, pairs)
            worst = max(worst, abs(float(table.entries[j, a]) - direct))
    return worst
