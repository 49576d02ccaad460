"""Real-valued risk functionals on finitely supported distributions.

Every functional maps a cost vector ``z`` with scenario probabilities ``q``
to a real number:

* ``expectation``      E[z]
* ``cvar(alpha)``      min_t  t + E[(z - t)_+] / alpha   (tail average)
* ``mad(c)``           E[z] + c * E|z - E[z]|
* ``musd(c, p)``       E[z] + c * (E[(z - E[z])_+^p])^(1/p)
* ``gmsd(rfun, c, p)`` E[z] + c * (E[R(z - E[z])^p])^(1/p)

The CVaR minimization over ``t`` is carried out exactly over the atoms of
``z`` (an optimal ``t`` is always an atom on finite supports), so evaluation
is deterministic with no grid error.  :func:`cvar_envelope` computes the same
value through the dual route: the supremum of reweighted expectations over
the bounded multiplier set ``{zeta : 0 <= zeta <= 1/alpha, E[zeta] = 1}``.

``expectation`` and ``cvar`` are coherent for all admissible parameters;
``mad`` is coherent for ``c in [0, 1/2]`` and ``musd`` for ``c in [0, 1]``.
``gmsd`` carries no coherence guarantee and is always flagged non-coherent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AlignmentError, InvalidAlpha, InvalidSpec
from .scenario import DiscreteMarginal

KINDS = ("expectation", "cvar", "mad", "musd", "gmsd")

R_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "abs": np.abs,
    "relu": lambda u: np.maximum(u, 0.0),
    "square-relu": lambda u: np.maximum(u, 0.0) ** 2,
}


@dataclass(frozen=True)
class RandomCost:
    """A cost vector aligned with a marginal's scenarios."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        self.values.setflags(write=False)
        if not np.all(np.isfinite(self.values)):
            raise InvalidSpec("cost values must be finite")


@dataclass(frozen=True)
class RiskSpec:
    """Tagged description of one risk functional."""

    kind: str
    alpha: float = 1.0        # cvar only
    c: float = 0.0            # mad / musd / gmsd
    order: float = 1.0        # musd / gmsd (p >= 1)
    rfun: str = "abs"         # gmsd only

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown risk kind {self.kind!r}")
        if self.kind == "cvar" and not (0.0 < self.alpha <= 1.0):
            raise InvalidAlpha(f"cvar tail level must lie in (0, 1], got {self.alpha}")
        if self.kind in ("mad", "musd", "gmsd") and self.c < 0.0:
            raise InvalidSpec(f"deviation coefficient must be >= 0, got {self.c}")
        if self.kind in ("musd", "gmsd") and self.order < 1.0:
            raise InvalidSpec(f"semideviation order must be >= 1, got {self.order}")
        if self.kind == "gmsd" and self.rfun not in R_FUNCTIONS:
            raise InvalidSpec(f"unknown rfun {self.rfun!r} (registry: {sorted(R_FUNCTIONS)})")

    @property
    def coherent(self) -> bool:
        if self.kind in ("expectation", "cvar"):
            return True
        if self.kind == "mad":
            return self.c <= 0.5
        if self.kind == "musd":
            return self.c <= 1.0
        return False


def expectation() -> RiskSpec:
    return RiskSpec(kind="expectation")


def cvar(alpha: float) -> RiskSpec:
    return RiskSpec(kind="cvar", alpha=alpha)


def mad(c: float) -> RiskSpec:
    return RiskSpec(kind="mad", c=c)


def musd(c: float, order: float = 1.0) -> RiskSpec:
    return RiskSpec(kind="musd", c=c, order=order)


def gmsd(rfun: str, c: float, order: float = 1.0) -> RiskSpec:
    return RiskSpec(kind="gmsd", rfun=rfun, c=c, order=order)


def parse_risk_spec(text: str) -> RiskSpec:
    """Parse the textual form used in configs.

    ``expectation`` | ``cvar:0.1`` | ``mad:0.5`` | ``musd:1.0:1`` |
    ``gmsd:abs:0.5:1``.
    """
    parts = [p.strip() for p in text.strip().split(":")]
    kind = parts[0]
    try:
        if kind == "expectation" and len(parts) == 1:
            return expectation()
        if kind == "cvar" and len(parts) == 2:
            return cvar(float(parts[1]))
        if kind == "mad" and len(parts) == 2:
            return mad(float(parts[1]))
        if kind == "musd" and len(parts) == 3:
            return musd(float(parts[1]), float(parts[2]))
        if kind == "gmsd" and len(parts) == 4:
            return gmsd(parts[1], float(parts[2]), float(parts[3]))
    except ValueError as exc:
        raise InvalidSpec(f"bad risk spec {text!r}: {exc}") from None
    raise InvalidSpec(f"bad risk spec {text!r}")


def format_risk_spec(spec: RiskSpec) -> str:
    if spec.kind == "expectation":
        return "expectation"
    if spec.kind == "cvar":
        return f"cvar:{spec.alpha:g}"
    if spec.kind == "mad":
        return f"mad:{spec.c:g}"
    if spec.kind == "musd":
        return f"musd:{spec.c:g}:{spec.order:g}"
    return f"gmsd:{spec.rfun}:{spec.c:g}:{spec.order:g}"


# --- evaluation ----------------------------------------------------------------

def risk_value(spec: RiskSpec, values: np.ndarray, probs: np.ndarray) -> float:
    """Evaluate ``spec`` on cost ``values`` under the (sub)probability vector ``probs``.

    ``probs`` must be nonnegative and sum to one, but individual entries may
    be zero; this is what reweighted evaluation under a density ratio needs.
    """
    z = np.asarray(values, dtype=float)
    q = np.asarray(probs, dtype=float)
    if z.shape != q.shape:
        raise AlignmentError(f"cost has shape {z.shape}, probabilities {q.shape}")
    if spec.kind == "expectation":
        return float(q @ z)
    if spec.kind == "cvar":
        return _cvar_value(z, q, spec.alpha)
    m = float(q @ z)
    centered = z - m
    if spec.kind == "mad":
        return m + spec.c * float(q @ np.abs(centered))
    if spec.kind == "musd":
        dev = np.maximum(centered, 0.0) ** spec.order
        return m + spec.c * float(q @ dev) ** (1.0 / spec.order)
    dev = R_FUNCTIONS[spec.rfun](centered) ** spec.order
    return m + spec.c * float(q @ dev) ** (1.0 / spec.order)


def _cvar_value(z: np.ndarray, q: np.ndarray, alpha: float) -> float:
    # Exact minimization of t + E[(z-t)_+]/alpha over the atoms of z.
    order = np.argsort(z, kind="stable")
    zs = z[order]
    qs = q[order]
    # suffix sums over strictly-later sorted entries
    suffix_q = np.zeros_like(qs)
    suffix_zq = np.zeros_like(qs)
    if zs.shape[0] > 1:
        suffix_q[:-1] = np.cumsum((qs[1:])[::-1])[::-1]
        suffix_zq[:-1] = np.cumsum((qs[1:] * zs[1:])[::-1])[::-1]
    f = zs + (suffix_zq - zs * suffix_q) / alpha
    return float(f.min())


def evaluate(spec: RiskSpec, z, m: DiscreteMarginal) -> float:
    """Evaluate a risk functional against a marginal's probabilities."""
    values = z.values if isinstance(z, RandomCost) else np.asarray(z, dtype=float)
    if values.shape[0] != m.size:
        raise AlignmentError(f"cost has {values.shape[0]} entries, marginal has {m.size}")
    return risk_value(spec, values, m.probs)


# --- CVaR dual envelope ---------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeElement:
    """A feasible multiplier of the CVaR envelope: zeta >= 0 with E[zeta] = 1."""

    zeta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "zeta", np.asarray(self.zeta, dtype=float))
        self.zeta.setflags(write=False)


def cvar_envelope(alpha: float, z, m: DiscreteMarginal) -> tuple[float, EnvelopeElement]:
    """Greedy maximizer of ``E[zeta * z]`` over the CVaR envelope.

    Scenarios are visited in decreasing cost order (ties broken by ascending
    index); each receives ``zeta = 1/alpha`` until the visited probability
    mass reaches ``alpha``, the boundary atom a fractional value, later atoms
    zero.  Returns the attained value and the maximizing element.
    """
    if not (0.0 < alpha <= 1.0):
        raise InvalidAlpha(f"cvar tail level must lie in (0, 1], got {alpha}")
    values = z.values if isinstance(z, RandomCost) else np.asarray(z, dtype=float)
    if values.shape[0] != m.size:
        raise AlignmentError(f"cost has {values.shape[0]} entries, marginal has {m.size}")
    probs = m.probs
    inv_alpha = 1.0 / alpha
    # stable sort on (-z) keeps ascending scenario index within ties
    order = np.argsort(-values, kind="stable")
    zeta = np.zeros_like(probs)
    remaining = alpha
    for j in order:
        if remaining <= 0.0:
            break
        take = min(probs[j], remaining)
        zeta[j] = inv_alpha if take == probs[j] else min(take / (probs[j] * alpha), inv_alpha)
        remaining -= take
    value = float(np.dot(probs * zeta, values))
    return value, EnvelopeElement(zeta=zeta)


# --- axiom verification ----------------------------------------------------------

@dataclass(frozen=True)
class AxiomReport:
    """Maximum observed violations of the risk-functional axioms over a random sweep.

    ``monotonicity`` and ``translation`` are populated only for specs flagged
    coherent; convexity and positive homogeneity are always recorded.
    """

    spec: RiskSpec
    trials: int
    seed: int
    coherent: bool
    convexity: float
    homogeneity: float
    monotonicity: float | None
    translation: float | None

    @property
    def worst(self) -> float:
        vals = [self.convexity, self.homogeneity]
        if self.monotonicity is not None:
            vals.append(self.monotonicity)
        if self.translation is not None:
            vals.append(self.translation)
        return max(vals)


def axiom_report(spec: RiskSpec, trials: int, seed: int, max_support: int = 64) -> AxiomReport:
    """Sweep random cost pairs on random marginals and record axiom violations."""
    if trials < 1:
        raise InvalidSpec(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    coherent = spec.coherent
    conv = hom = mono = trans = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, max_support + 1))
        q = rng.uniform(0.1, 1.0, n)
        q /= q.sum()
        z1 = rng.uniform(-5.0, 5.0, n)
        z2 = rng.uniform(-5.0, 5.0, n)
        theta = float(rng.uniform())
        a = float(rng.uniform(0.1, 3.0))
        b = float(rng.uniform(-5.0, 5.0))
        r1 = risk_value(spec, z1, q)
        r2 = risk_value(spec, z2, q)
        mixed = risk_value(spec, theta * z1 + (1.0 - theta) * z2, q)
        conv = max(conv, mixed - (theta * r1 + (1.0 - theta) * r2))
        hom = max(hom, abs(risk_value(spec, a * z1, q) - a * r1))
        if coherent:
            bump = rng.uniform(0.0, 2.0, n)
            mono = max(mono, r1 - risk_value(spec, z1 + bump, q))
            trans = max(trans, abs(risk_value(spec, z1 + b, q) - r1 - b))
    return AxiomReport(
        spec=spec,
        trials=trials,
        seed=seed,
        coherent=coherent,
        convexity=conv,
        homogeneity=hom,
        monotonicity=mono if coherent else None,
        translation=trans if coherent else None,
    )
