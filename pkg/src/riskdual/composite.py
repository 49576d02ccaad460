"""Two-step composite risk: outer risk of a cost-table row selection.

``compose`` evaluates the outer risk of ``z_j = table[j][policy_j]`` directly
under a constraint's own marginal.  ``reweighted_compose`` evaluates the same
quantity under the *base* marginal by folding the density ratio ``w`` into
the scenario probabilities (``q_j = p0_j * w_j``), which is exact for every
supported outer functional:

* expectation:  sum_j p0_j w_j z_j
* cvar(alpha):  min_t  t + (1/alpha) sum_j p0_j w_j (z_j - t)_+
* mad / musd:   all inner expectations taken with weights p0_j w_j

For CVaR the hinge is applied to the raw cost before weighting,
``(z - t)_+ * w`` and not ``(z * w - t)_+``; the latter is the natural
mistake and computes a different functional.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .condrisk import CostTable
from .errors import AlignmentError
from .riskcore import RiskSpec, risk_value
from .scenario import DiscreteMarginal, WeightVector


@dataclass(frozen=True)
class CompositeFunctional:
    """Outer risk spec plus the data needed to evaluate it on the base marginal."""

    outer: RiskSpec
    table: CostTable
    weights: WeightVector
    base: DiscreteMarginal

    def __post_init__(self):
        if self.table.n_scenarios != self.base.size:
            raise AlignmentError(
                f"table has {self.table.n_scenarios} rows, base has {self.base.size} scenarios"
            )
        if self.weights.w.shape[0] != self.base.size:
            raise AlignmentError(
                f"weights have {self.weights.w.shape[0]} entries, base has {self.base.size}"
            )


def _select(table: CostTable, policy: Sequence[int]) -> np.ndarray:
    pol = np.asarray(policy, dtype=int)
    if pol.shape[0] != table.n_scenarios:
        raise AlignmentError(
            f"policy selects {pol.shape[0]} actions, table has {table.n_scenarios} rows"
        )
    if np.any(pol < 0) or np.any(pol >= table.n_actions):
        raise AlignmentError(f"policy indices out of range [0, {table.n_actions})")
    return table.entries[np.arange(table.n_scenarios), pol]


def compose(
    outer: RiskSpec, table: CostTable, marginal_i: DiscreteMarginal, policy: Sequence[int]
) -> float:
    """Outer risk of the policy's cost row selection under ``marginal_i``."""
    if table.n_scenarios != marginal_i.size:
        raise AlignmentError(
            f"table has {table.n_scenarios} rows, marginal has {marginal_i.size} scenarios"
        )
    return risk_value(outer, _select(table, policy), marginal_i.probs)


def reweighted_compose(cf: CompositeFunctional, policy: Sequence[int]) -> float:
    """Same composite value evaluated under the base marginal via the weights."""
    z = _select(cf.table, policy)
    return risk_value(cf.outer, z, cf.base.probs * cf.weights.w)
