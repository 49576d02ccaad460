"""Problem instances: objective + constraints, lowering to base-measure tables.

An :class:`RCLInstance` couples a base feature marginal with ``m + 1`` joint
models (index 0 is the objective), one loss / inner risk / outer risk per
index, constraint thresholds and a finite action grid.  :func:`lower`
materializes it into :class:`RCL0Tables`: per-index cost tables and density
ratios, everything aligned with the base support, which is the only form the
solver and the oracles consume.  Lowering preserves every policy's objective
and constraint values exactly (up to float roundoff).

Policies are one action index per base scenario (the policy space is fully
decomposable by construction); :class:`MixedPolicy` adds independent
per-scenario randomization over the grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .condrisk import ActionGrid, CostTable, inner_cost_table
from .errors import AlignmentError, NotSupported, ValidationError
from .losses import LossSpec
from .riskcore import RiskSpec, risk_value
from .scenario import (
    Density,
    DiscreteMarginal,
    JointModel,
    LabelRule,
    RefinementFamily,
    WeightVector,
    compute_weights,
    refine,
)

FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class Policy:
    """One grid-action index per base scenario."""

    choice: tuple[int, ...]


@dataclass(frozen=True)
class MixedPolicy:
    """Per-scenario probability rows over grid actions."""

    rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rows", np.asarray(self.rows, dtype=float))
        self.rows.setflags(write=False)
        if self.rows.ndim != 2:
            raise ValidationError(f"mixed policy rows must be 2-d, got {self.rows.shape}")
        if np.any(self.rows < 0.0):
            raise ValidationError("mixed policy rows must be nonnegative")
        sums = self.rows.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-12):
            raise ValidationError("mixed policy rows must each sum to 1 within 1e-12")


def one_hot(policy: Sequence[int], n_actions: int) -> MixedPolicy:
    pol = np.asarray(policy, dtype=int)
    rows = np.zeros((pol.shape[0], n_actions), dtype=float)
    rows[np.arange(pol.shape[0]), pol] = 1.0
    return MixedPolicy(rows=rows)


@dataclass(frozen=True)
class RCLInstance:
    """Full problem statement on explicit finite scenario models."""

    base: DiscreteMarginal
    joints: tuple[JointModel, ...]     # m + 1 entries, index 0 = objective
    losses: tuple[LossSpec, ...]
    inner: tuple[RiskSpec, ...]
    outer: tuple[RiskSpec, ...]
    thresholds: np.ndarray             # c_1 .. c_m
    grid: ActionGrid

    def __post_init__(self):
        object.__setattr__(self, "thresholds", np.asarray(self.thresholds, dtype=float))
        self.thresholds.setflags(write=False)
        k = len(self.joints)
        if not (len(self.losses) == len(self.inner) == len(self.outer) == k):
            raise AlignmentError("joints, losses, inner and outer specs must all have m+1 entries")
        if self.thresholds.shape[0] != k - 1:
            raise AlignmentError(
                f"{k - 1} constraints but {self.thresholds.shape[0]} thresholds"
            )
        if k < 2:
            raise ValidationError("need at least one constraint (m >= 1)")
        if not np.all(np.isfinite(self.thresholds)):
            raise ValidationError("thresholds must be finite")

    @property
    def m(self) -> int:
        return len(self.joints) - 1


@dataclass(frozen=True)
class RCL0Tables:
    """Lowered instance: everything aligned with the base support."""

    base: DiscreteMarginal
    weights: tuple[WeightVector, ...]  # m + 1
    tables: tuple[CostTable, ...]      # m + 1
    outer: tuple[RiskSpec, ...]
    thresholds: np.ndarray
    grid: ActionGrid

    def __post_init__(self):
        object.__setattr__(self, "thresholds", np.asarray(self.thresholds, dtype=float))
        self.thresholds.setflags(write=False)
        n = self.base.size
        for w, table in zip(self.weights, self.tables):
            if w.w.shape[0] != n or table.n_scenarios != n:
                raise AlignmentError("weights and tables must align with the base support")

    @property
    def m(self) -> int:
        return len(self.tables) - 1

    @property
    def n_scenarios(self) -> int:
        return self.base.size

    @property
    def n_actions(self) -> int:
        return self.tables[0].n_actions

    def scenario_probs(self, i: int) -> np.ndarray:
        """Effective scenario probabilities of term ``i`` on the base support."""
        return self.base.probs * self.weights[i].w


def lower(instance: RCLInstance) -> RCL0Tables:
    """Materialize density ratios and inner-risk cost tables on the base support.

    Rows of constraint ``i``'s table at base points outside joint ``i``'s
    support are zero; they carry zero weight and never affect any value.
    """
    base = instance.base
    index = base.index_of()
    weights: list[WeightVector] = []
    tables: list[CostTable] = []
    for joint, loss, inner in zip(instance.joints, instance.losses, instance.inner):
        w = compute_weights(base, joint.marginal)
        local = inner_cost_table(loss, joint, instance.grid, inner)
        entries = np.zeros((base.size, instance.grid.size), dtype=float)
        for row, pt in enumerate(joint.marginal.points):
            entries[index[pt]] = local.entries[row]
        weights.append(w)
        tables.append(CostTable(entries=entries))
    return RCL0Tables(
        base=base,
        weights=tuple(weights),
        tables=tuple(tables),
        outer=instance.outer,
        thresholds=instance.thresholds,
        grid=instance.grid,
    )


# --- policy evaluation ------------------------------------------------------------

def term_value(t: RCL0Tables, i: int, policy: Sequence[int]) -> float:
    """Value of term ``i`` (0 = objective) at a deterministic policy."""
    pol = np.asarray(policy, dtype=int)
    if pol.shape[0] != t.n_scenarios:
        raise AlignmentError(f"policy length {pol.shape[0]} != {t.n_scenarios} scenarios")
    z = t.tables[i].entries[np.arange(t.n_scenarios), pol]
    return risk_value(t.outer[i], z, t.scenario_probs(i))


def policy_values(t: RCL0Tables, policy: Sequence[int]) -> tuple[float, np.ndarray]:
    """Objective value and the vector of constraint values."""
    obj = term_value(t, 0, policy)
    cons = np.array([term_value(t, i, policy) for i in range(1, t.m + 1)])
    return obj, cons


def is_feasible(t: RCL0Tables, policy: Sequence[int], tol: float = FEASIBILITY_TOL) -> bool:
    _, cons = policy_values(t, policy)
    return bool(np.all(cons <= t.thresholds + tol))


def mixed_term_value(t: RCL0Tables, i: int, mixed: MixedPolicy) -> float:
    """Term value at a mixed policy; expectation outer only (linear in the mixture)."""
    if t.outer[i].kind != "expectation":
        raise NotSupported("mixed-policy evaluation requires expectation outer functionals")
    if mixed.rows.shape != (t.n_scenarios, t.n_actions):
        raise AlignmentError(
            f"mixed policy shape {mixed.rows.shape} != {(t.n_scenarios, t.n_actions)}"
        )
    per_scenario = (mixed.rows * t.tables[i].entries).sum(axis=1)
    return float(t.scenario_probs(i) @ per_scenario)


def mixed_policy_values(t: RCL0Tables, mixed: MixedPolicy) -> tuple[float, np.ndarray]:
    obj = mixed_term_value(t, 0, mixed)
    cons = np.array([mixed_term_value(t, i, mixed) for i in range(1, t.m + 1)])
    return obj, cons


# --- Slater check ------------------------------------------------------------------

@dataclass(frozen=True)
class SlaterReport:
    """Outcome of the strict-feasibility search.

    ``found`` means a policy with every constraint at least ``margin`` below
    its threshold was exhibited.  ``conclusive`` is False when only the greedy
    heuristic ran (enumeration over budget) and it failed; a strictly feasible
    policy may still exist.  ``mixed_slack`` is the best slack achievable with
    per-scenario randomization, available for single-constraint instances
    with an expectation outer (where it coincides with the deterministic
    optimum of the slack).
    """

    found: bool
    witness: Policy | None
    slack: np.ndarray | None
    margin: float
    method: str
    conclusive: bool
    best_slack: float
    mixed_slack: float | None


def check_slater(
    t: RCL0Tables, margin: float, max_policies: int = 1_000_000
) -> SlaterReport:
    """Search for a policy satisfying every constraint with slack >= ``margin``.

    Greedy pass first: pointwise minimization of the sum of max-normalized
    constraint contributions.  If that fails and the policy count fits the
    budget, exhaustive search for the max-min-slack policy.
    """
    if margin <= 0.0:
        raise ValidationError(f"margin must be positive, got {margin}")
    n, a, m = t.n_scenarios, t.n_actions, t.m

    contrib = []
    for i in range(1, m + 1):
        c = t.weights[i].w[:, None] * t.tables[i].entries
        contrib.append(c)
    scales = np.array([max(np.abs(c).max(), 1e-30) for c in contrib])
    score = sum(c / s for c, s in zip(contrib, scales))
    greedy = tuple(int(v) for v in np.argmin(score, axis=1))

    def slack_of(policy) -> np.ndarray:
        _, cons = policy_values(t, policy)
        return t.thresholds - cons

    greedy_slack = slack_of(greedy)
    if float(greedy_slack.min()) >= margin:
        return SlaterReport(
            found=True,
            witness=Policy(choice=greedy),
            slack=greedy_slack,
            margin=margin,
            method="greedy",
            conclusive=True,
            best_slack=float(greedy_slack.min()),
            mixed_slack=_mixed_slack(t),
        )

    best_policy, best = greedy, float(greedy_slack.min())
    if float(a) ** n <= max_policies:
        for pol in product(range(a), repeat=n):
            s = float(slack_of(pol).min())
            if s > best:
                best, best_policy = s, pol
        found = best >= margin
        return SlaterReport(
            found=found,
            witness=Policy(choice=tuple(best_policy)) if found else None,
            slack=slack_of(best_policy) if found else None,
            margin=margin,
            method="exhaustive",
            conclusive=True,
            best_slack=best,
            mixed_slack=_mixed_slack(t),
        )
    return SlaterReport(
        found=False,
        witness=None,
        slack=None,
        margin=margin,
        method="greedy",
        conclusive=False,
        best_slack=best,
        mixed_slack=_mixed_slack(t),
    )


def _mixed_slack(t: RCL0Tables) -> float | None:
    # Best possible slack under randomization; linear in the mixture for an
    # expectation outer, hence attained by the pointwise minimum.
    if t.m != 1 or t.outer[1].kind != "expectation":
        return None
    q = t.scenario_probs(1)
    best = float(q @ t.tables[1].entries.min(axis=1))
    return float(t.thresholds[0]) - best


# --- refinement families -------------------------------------------------------------

@dataclass(frozen=True)
class InstanceFamily:
    """A problem whose scenario models come from densities on a shared interval.

    ``materialize(n)`` discretizes every joint on the same ``n``-cell grid,
    yielding an explicit :class:`RCLInstance`; growing ``n`` drives the models
    toward their continuous limit.
    """

    base_density: Density
    joint_densities: tuple[Density, ...]   # m + 1, typically repeating the base
    label_rules: tuple[LabelRule, ...]
    losses: tuple[LossSpec, ...]
    inner: tuple[RiskSpec, ...]
    outer: tuple[RiskSpec, ...]
    thresholds: tuple[float, ...]
    grid: ActionGrid
    levels: tuple[int, ...] = ()

    def __post_init__(self):
        for d in self.joint_densities:
            if (d.lo, d.hi) != (self.base_density.lo, self.base_density.hi):
                raise ValidationError("all joint densities must share the base interval")

    def materialize(self, n: int) -> RCLInstance:
        base_joint = refine(
            RefinementFamily(density=self.base_density, label_rule=self.label_rules[0]), n
        )
        base = base_joint.marginal
        joints = []
        for density, rule in zip(self.joint_densities, self.label_rules):
            fam = RefinementFamily(density=density, label_rule=rule)
            model = refine(fam, n)
            if model.marginal.points != base.points:
                raise ValidationError("joint refinement did not share the base grid")
            joints.append(model)
        return RCLInstance(
            base=base,
            joints=tuple(joints),
            losses=self.losses,
            inner=self.inner,
            outer=self.outer,
            thresholds=np.asarray(self.thresholds, dtype=float),
            grid=self.grid,
        )
