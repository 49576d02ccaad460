"""Loss functions mapping (action, label) to a nonnegative cost.

A :class:`LossSpec` is either a registry name with parameters or a parsed
expression.  Registry losses take scalar actions (``k = 1``); expressions may
address any action component via ``z1 .. zk``.  Expression losses are clamped
at zero from below (a warning is emitted once per spec), keeping every loss
nonnegative.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lossexpr
from .errors import EvalError, InvalidSpec, LossEvalError

REGISTRY_KINDS = (
    "zero-one",
    "abs-dev",
    "quad",
    "truncated-quad",
    "hinge",
    "sin-perturbed-quad",
)


class NegativeLossWarning(UserWarning):
    """An expression loss produced negative values; they were clamped to zero."""


@dataclass(frozen=True)
class LossSpec:
    """Registry loss (``kind`` + ``params``) or expression loss (``kind='expr'``)."""

    kind: str
    params: tuple[tuple[str, float], ...] = ()
    expr_text: str | None = None
    expr: lossexpr.Node | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == "expr":
            if self.expr_text is None:
                raise InvalidSpec("expression loss needs source text")
            if self.expr is None:
                object.__setattr__(self, "expr", lossexpr.parse_loss_expr(self.expr_text))
            return
        if self.kind not in REGISTRY_KINDS:
            raise InvalidSpec(f"unknown loss kind {self.kind!r} (registry: {REGISTRY_KINDS})")

    def param(self, name: str, default: float) -> float:
        for key, value in self.params:
            if key == name:
                return value
        return default


def registry_loss(kind: str, **params: float) -> LossSpec:
    return LossSpec(kind=kind, params=tuple(sorted((k, float(v)) for k, v in params.items())))


def expr_loss(text: str) -> LossSpec:
    return LossSpec(kind="expr", expr_text=text)


def loss_values(spec: LossSpec, action: Sequence[float], labels: np.ndarray) -> np.ndarray:
    """Evaluate the loss at one action against an array of labels."""
    y = np.asarray(labels, dtype=float)
    if spec.kind == "expr":
        out = np.empty_like(y)
        clamped = False
        for i, yi in enumerate(y):
            try:
                v = lossexpr.evaluate(spec.expr, action, float(yi))
            except EvalError as exc:
                raise LossEvalError(
                    f"loss {spec.expr_text!r} failed at action {tuple(action)}, label {yi}: {exc}"
                ) from exc
            if v < 0.0:
                clamped = True
                v = 0.0
            out[i] = v
        if clamped:
            warnings.warn(
                f"expression loss {spec.expr_text!r} produced negative values; clamped to 0",
                NegativeLossWarning,
                stacklevel=2,
            )
        return out
    if len(action) != 1:
        raise LossEvalError(f"registry loss {spec.kind!r} expects scalar actions, got {action}")
    a = float(action[0])
    if spec.kind == "zero-one":
        threshold = spec.param("threshold", 0.5)
        out = (np.abs(a - y) > threshold).astype(float)
    elif spec.kind == "abs-dev":
        out = np.abs(a - y)
    elif spec.kind == "quad":
        out = (a - y) ** 2
    elif spec.kind == "truncated-quad":
        cap = spec.param("cap", 1.0)
        out = np.minimum((a - y) ** 2, cap)
    elif spec.kind == "hinge":
        out = np.maximum(0.0, 1.0 - a * y)
    else:  # sin-perturbed-quad
        amplitude = spec.param("amplitude", 0.5)
        frequency = spec.param("frequency", 5.0)
        out = np.maximum(0.0, (a - y) ** 2 + amplitude * np.sin(frequency * (a - y)))
    if not np.all(np.isfinite(out)):
        raise LossEvalError(f"loss {spec.kind!r} produced non-finite values at action {action}")
    return out
