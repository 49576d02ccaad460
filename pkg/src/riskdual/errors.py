"""Exception hierarchy.

Every public function raises subclasses of :class:`RiskDualError`; plain
``ValueError``/``TypeError`` escaping the package is a bug.
"""

from __future__ import annotations


class RiskDualError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RiskDualError, ValueError):
    """Inputs violate a documented contract."""


# --- scenario models ---------------------------------------------------------

class NonPositiveProb(ValidationError):
    """A probability atom is zero or negative."""


class ProbSumMismatch(ValidationError):
    """Probabilities do not sum to one within tolerance."""


class DuplicatePoint(ValidationError):
    """Support points of a marginal are not pairwise distinct."""


class SupportViolation(ValidationError):
    """A marginal places mass outside the base support (absolute continuity fails)."""


class UnsupportedDensity(ValidationError):
    """Density name not present in the registry."""


# --- risk functionals --------------------------------------------------------

class InvalidSpec(ValidationError):
    """Malformed risk-functional specification."""


class InvalidAlpha(InvalidSpec):
    """CVaR tail level outside (0, 1]."""


class AlignmentError(ValidationError):
    """Vector/table length does not match the scenario support it is paired with."""


# --- losses and expressions --------------------------------------------------

class LossEvalError(RiskDualError):
    """A loss failed to evaluate to a finite value on the grid/labels."""


class LossExprError(RiskDualError):
    """Base class for loss-expression parser errors; carries a position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return f"line {self.line}, col {self.col}: {self.message}"


class ExprSyntaxError(LossExprError):
    """Malformed expression text."""


class UnknownIdentifier(LossExprError):
    """Identifier is neither a variable (z1..zk, y) nor a registered function."""


class ArityError(LossExprError):
    """A function call has the wrong number of arguments."""


class EvalError(RiskDualError):
    """Expression evaluation left the reals (log of nonpositive, division by zero, ...)."""


# --- solver and oracles ------------------------------------------------------

class UnsupportedOuter(RiskDualError):
    """Outer risk functional outside the solver-supported set {expectation, cvar}."""


class NotSingleConstraint(RiskDualError):
    """Operation requires exactly one constraint (m = 1)."""


class NotSupported(RiskDualError):
    """Oracle preconditions (constraint count / outer functionals) not met."""


class BudgetExceeded(RiskDualError):
    """Enumeration budget too small for the requested instance."""


class GridDimensionExceeded(RiskDualError):
    """Multiplier grid search is capped at two constraints."""


class DualDivergence(RiskDualError):
    """Dual maximization is unbounded (the instance is infeasible)."""


# --- configuration -----------------------------------------------------------

class ConfigError(RiskDualError):
    """Configuration document is invalid; carries a document position when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"line {self.line}, col {self.col}: {self.message}"
