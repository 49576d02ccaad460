"""Finite scenario models of feature/label distributions.

A :class:`DiscreteMarginal` is a finitely supported feature distribution; a
:class:`JointModel` pairs it with per-scenario label distributions.  Density
ratios between two marginals on a shared support are computed by
:func:`compute_weights`.  Continuous feature distributions enter only through
:class:`RefinementFamily`: a density on a bounded interval discretized into
``n`` equal cells, so that growing ``n`` approximates the continuous
(atom-free) limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    AlignmentError,
    DuplicatePoint,
    NonPositiveProb,
    ProbSumMismatch,
    SupportViolation,
    UnsupportedDensity,
    ValidationError,
)

PROB_SUM_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-10


def _as_point(p) -> tuple[float, ...]:
    if isinstance(p, (int, float)):
        return (float(p),)
    return tuple(float(v) for v in p)


@dataclass(frozen=True)
class DiscreteMarginal:
    """Finitely supported feature distribution.

    ``points`` are pairwise-distinct feature vectors, ``probs`` strictly
    positive and summing to one within ``1e-12``.
    """

    points: tuple[tuple[float, ...], ...]
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))
        self.probs.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.points)

    def index_of(self) -> dict[tuple[float, ...], int]:
        return {pt: j for j, pt in enumerate(self.points)}


def build_marginal(points: Sequence, probs: Sequence[float]) -> DiscreteMarginal:
    """Validate and construct a :class:`DiscreteMarginal`.

    Raises :class:`NonPositiveProb`, :class:`ProbSumMismatch` or
    :class:`DuplicatePoint` when the invariants fail.
    """
    pts = tuple(_as_point(p) for p in points)
    pr = np.asarray(list(probs), dtype=float)
    if len(pts) == 0 or len(pts) != pr.shape[0]:
        raise ValidationError(
            f"need equally many points and probabilities, got {len(pts)} and {pr.shape[0]}"
        )
    if not np.all(np.isfinite(pr)):
        raise NonPositiveProb("probabilities must be finite")
    if np.any(pr <= 0.0):
        raise NonPositiveProb(f"probabilities must be strictly positive, got {pr.tolist()}")
    total = float(pr.sum())
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ProbSumMismatch(f"probabilities sum to {total!r}, expected 1 within {PROB_SUM_TOL}")
    if len(set(pts)) != len(pts):
        raise DuplicatePoint("support points must be pairwise distinct")
    return DiscreteMarginal(points=pts, probs=pr)


@dataclass(frozen=True)
class ConditionalLabelDist:
    """Per-scenario label distributions: one list of ``(label, prob)`` per scenario."""

    table: tuple[tuple[tuple[float, float], ...], ...]

    def __post_init__(self):
        for j, row in enumerate(self.table):
            if len(row) == 0:
                raise ValidationError(f"scenario {j}: empty label distribution")
            s = 0.0
            for y, q in row:
                if not (math.isfinite(y) and math.isfinite(q)):
                    raise ValidationError(f"scenario {j}: non-finite label entry")
                if q <= 0.0:
                    raise NonPositiveProb(f"scenario {j}: label probability {q!r} not positive")
                s += q
            if abs(s - 1.0) > PROB_SUM_TOL:
                raise ProbSumMismatch(f"scenario {j}: label probabilities sum to {s!r}")

    @property
    def size(self) -> int:
        return len(self.table)

    def labels(self, j: int) -> np.ndarray:
        return np.array([y for y, _ in self.table[j]], dtype=float)

    def label_probs(self, j: int) -> np.ndarray:
        return np.array([q for _, q in self.table[j]], dtype=float)


def build_conditional(rows: Sequence[Sequence[tuple[float, float]]]) -> ConditionalLabelDist:
    return ConditionalLabelDist(
        table=tuple(tuple((float(y), float(q)) for y, q in row) for row in rows)
    )


@dataclass(frozen=True)
class JointModel:
    """A feature marginal together with the label distribution at each scenario."""

    marginal: DiscreteMarginal
    conditional: ConditionalLabelDist

    def __post_init__(self):
        if self.marginal.size != self.conditional.size:
            raise AlignmentError(
                f"marginal has {self.marginal.size} scenarios, "
                f"conditional has {self.conditional.size}"
            )

    @property
    def size(self) -> int:
        return self.marginal.size


@dataclass(frozen=True)
class WeightVector:
    """Density of one marginal relative to a base marginal, one value per base scenario.

    Nonnegative, with ``sum_j base.probs[j] * w[j] == 1`` within ``1e-10``.
    """

    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        self.w.setflags(write=False)
        if np.any(self.w < 0.0) or not np.all(np.isfinite(self.w)):
            raise ValidationError("weights must be finite and nonnegative")


def compute_weights(base: DiscreteMarginal, other: DiscreteMarginal) -> WeightVector:
    """Pointwise density ``w[j] = other.prob(point_j) / base.prob(point_j)``.

    Base points outside ``other``'s support get weight zero.  Raises
    :class:`SupportViolation` if ``other`` has mass on a point absent from
    ``base``.
    """
    index = base.index_of()
    w = np.zeros(base.size, dtype=float)
    for pt, q in zip(other.points, other.probs):
        j = index.get(pt)
        if j is None:
            raise SupportViolation(f"point {pt} carries mass but is not in the base support")
        w[j] = q / base.probs[j]
    total = float(np.dot(base.probs, w))
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ProbSumMismatch(f"weighted mass sums to {total!r}, expected 1 within {WEIGHT_SUM_TOL}")
    return WeightVector(w=w)


# --- density registry ---------------------------------------------------------

def _std_normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


@dataclass(frozen=True)
class Density:
    """Continuous density on a bounded interval, described by its CDF."""

    name: str
    lo: float
    hi: float
    cdf: Callable[[float], float] = field(compare=False)

    def cell_masses(self, n: int) -> np.ndarray:
        edges = [self.lo + (self.hi - self.lo) * i / n for i in range(n + 1)]
        raw = np.array(
            [self.cdf(edges[i + 1]) - self.cdf(edges[i]) for i in range(n)], dtype=float
        )
        total = raw.sum()
        if total <= 0.0:
            raise UnsupportedDensity(f"density {self.name!r} has no mass on [{self.lo}, {self.hi}]")
        return raw / total


def make_density(name: str, **params: float) -> Density:
    """Look up a density by registry name (``uniform`` or ``truncgauss``)."""
    lo = float(params.get("lo", 0.0))
    hi = float(params.get("hi", 1.0))
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise UnsupportedDensity(f"invalid interval [{lo}, {hi}]")
    if name == "uniform":
        span = hi - lo
        return Density(name=name, lo=lo, hi=hi, cdf=lambda x: (x - lo) / span)
    if name == "truncgauss":
        mu = float(params.get("mu", 0.5 * (lo + hi)))
        sigma = float(params.get("sigma", 0.25 * (hi - lo)))
        if sigma <= 0.0:
            raise UnsupportedDensity(f"truncgauss requires sigma > 0, got {sigma}")
        return Density(name=name, lo=lo, hi=hi, cdf=lambda x: _std_normal_cdf((x - mu) / sigma))
    raise UnsupportedDensity(f"unknown density {name!r} (registry: uniform, truncgauss)")


# --- label rules ---------------------------------------------------------------

LabelRule = Callable[[float], Sequence[tuple[float, float]]]


def make_label_rule(name: str, **params: float) -> LabelRule:
    """Label rule registry: map a feature value to a finite label distribution.

    ``const``  -> point mass at ``value``.
    ``step``   -> point mass at ``high`` when x >= ``threshold`` else ``low``.
    ``affine`` -> point mass at ``intercept + slope * x``.
    ``bern``   -> two labels ``y0``/``y1`` with P(y1) interpolated linearly
    from ``p_lo`` at ``lo`` to ``p_hi`` at ``hi`` (clipped to [0.01, 0.99]).
    """
    if name == "const":
        value = float(params.get("value", 0.0))
        return lambda x: [(value, 1.0)]
    if name == "step":
        threshold = float(params.get("threshold", 0.5))
        low = float(params.get("low", 0.0))
        high = float(params.get("high", 1.0))
        return lambda x: [(high if x >= threshold else low, 1.0)]
    if name == "affine":
        intercept = float(params.get("intercept", 0.0))
        slope = float(params.get("slope", 1.0))
        return lambda x: [(intercept + slope * x, 1.0)]
    if name == "bern":
        y0 = float(params.get("y0", 0.0))
        y1 = float(params.get("y1", 1.0))
        p_lo = float(params.get("p_lo", 0.25))
        p_hi = float(params.get("p_hi", 0.75))
        lo = float(params.get("lo", 0.0))
        hi = float(params.get("hi", 1.0))

        def rule(x: float) -> Sequence[tuple[float, float]]:
            t = 0.0 if hi == lo else (x - lo) / (hi - lo)
            p = min(0.99, max(0.01, p_lo + t * (p_hi - p_lo)))
            return [(y0, 1.0 - p), (y1, p)]

        return rule
    raise ValidationError(f"unknown label rule {name!r} (registry: const, step, affine, bern)")


@dataclass(frozen=True)
class RefinementFamily:
    """A density plus a label rule, discretized at any requested cell count.

    Level ``n`` splits the density's interval into ``n`` equal cells; each
    cell becomes one scenario at the cell midpoint carrying the cell mass.
    """

    density: Density
    label_rule: LabelRule = field(compare=False)
    levels: tuple[int, ...] = ()


def refine(family: RefinementFamily, n: int) -> JointModel:
    """Discretize ``family`` into an ``n``-scenario :class:`JointModel`."""
    if n < 1:
        raise ValidationError(f"refinement level must be >= 1, got {n}")
    d = family.density
    width = (d.hi - d.lo) / n
    points = [d.lo + (i + 0.5) * width for i in range(n)]
    probs = d.cell_masses(n)
    marginal = build_marginal(points, probs)
    conditional = build_conditional([family.label_rule(x) for x in points])
    return JointModel(marginal=marginal, conditional=conditional)
