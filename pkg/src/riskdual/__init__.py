"""Risk-constrained policy selection on finite scenario models.

The package lowers a constrained learning-style problem (an objective and
``m`` constraints, each a two-step composition of an inner per-scenario risk
functional with an outer risk functional) onto a common base marginal
via density-ratio weights, solves it in the Lagrangian dual domain by
per-scenario decomposition, and ships brute-force oracles to certify weak
duality, the zero gap attained by per-scenario randomization, and the decay
of the deterministic gap under scenario-model refinement.
"""

from .condrisk import ActionGrid, CostTable, build_grid, inner_cost_table, substitution_check
from .composite import CompositeFunctional, compose, reweighted_compose
from .dualsolve import (
    AnchorVector,
    DualReport,
    DualValue,
    Multipliers,
    bisect_dual_m1,
    dual_ascent,
    dual_function,
)
from .losses import LossSpec, expr_loss, registry_loss
from .lossexpr import parse_loss_expr
from .oracle import (
    BrutePrimal,
    MixedPrimal,
    OracleBudget,
    brute_primal,
    grid_dual,
    mixed_primal_m1,
    round_mixed,
)
from .problem import (
    InstanceFamily,
    MixedPolicy,
    Policy,
    RCL0Tables,
    RCLInstance,
    SlaterReport,
    check_slater,
    lower,
    mixed_policy_values,
    one_hot,
    policy_values,
)
from .riskcore import (
    AxiomReport,
    EnvelopeElement,
    RandomCost,
    RiskSpec,
    axiom_report,
    cvar,
    cvar_envelope,
    evaluate,
    expectation,
    format_risk_spec,
    gmsd,
    mad,
    musd,
    parse_risk_spec,
    risk_value,
)
from .scenario import (
    ConditionalLabelDist,
    DiscreteMarginal,
    JointModel,
    RefinementFamily,
    WeightVector,
    build_conditional,
    build_marginal,
    compute_weights,
    make_density,
    make_label_rule,
    refine,
)

__version__ = "0.1.0"

__all__ = [
    "ActionGrid",
    "AnchorVector",
    "AxiomReport",
    "BrutePrimal",
    "CompositeFunctional",
    "ConditionalLabelDist",
    "CostTable",
    "DiscreteMarginal",
    "DualReport",
    "DualValue",
    "EnvelopeElement",
    "InstanceFamily",
    "JointModel",
    "LossSpec",
    "MixedPolicy",
    "MixedPrimal",
    "Multipliers",
    "OracleBudget",
    "Policy",
    "RCL0Tables",
    "RCLInstance",
    "RandomCost",
    "RefinementFamily",
    "RiskSpec",
    "SlaterReport",
    "WeightVector",
    "axiom_report",
    "bisect_dual_m1",
    "brute_primal",
    "build_conditional",
    "build_grid",
    "build_marginal",
    "check_slater",
    "compose",
    "compute_weights",
    "cvar",
    "cvar_envelope",
    "dual_ascent",
    "dual_function",
    "evaluate",
    "expectation",
    "expr_loss",
    "format_risk_spec",
    "gmsd",
    "grid_dual",
    "inner_cost_table",
    "lower",
    "mad",
    "make_density",
    "make_label_rule",
    "mixed_policy_values",
    "mixed_primal_m1",
    "musd",
    "one_hot",
    "parse_loss_expr",
    "parse_risk_spec",
    "policy_values",
    "refine",
    "registry_loss",
    "reweighted_compose",
    "risk_value",
    "round_mixed",
    "substitution_check",
]
