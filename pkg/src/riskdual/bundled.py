"""Bundled reference instances.

``T1`` is the two-scenario hand-checkable instance used throughout the test
suite: deterministic labels equal to the feature, absolute-deviation
objective, mean action cost capped at 0.25.  Its optimum over deterministic
policies is 0.5, its dual optimum 0.25, and randomizing the second scenario
half-and-half attains 0.25 with the constraint tight.

``vanishing-gap`` refines a continuous model toward the atom-free limit:
uniform features, 0-1 objective against a step label, and a linear action
cost weighted by a symmetric truncated-gaussian density ratio.  At level 2 it
coincides with T1 scaled onto cell midpoints; as the level grows the
relative duality gap decays toward zero.

``convex-regression`` is a risk-neutral quadratic-fit instance on a dense
action grid whose dual gap is already tiny at a handful of scenarios.
"""

from __future__ import annotations

from .configio import RunSetup, load_setup

T1_CONFIG = """\
# two-scenario reference instance
[base]
points = 0, 1
probs = 0.5, 0.5

[joint.0]
labels.0 = 0:1
labels.1 = 1:1

[loss.0]
kind = abs-dev

[loss.1]
expr = z1

[inner.0]
spec = expectation
[inner.1]
spec = expectation
[outer.0]
spec = expectation
[outer.1]
spec = expectation

[thresholds]
c = 0.25

[grid]
actions = 0, 1

[solver]
step0 = 1.0
iters = 500
seed = 0
"""

VANISHING_GAP_CONFIG = """\
# refinement family: gap decays as the scenario count grows
[base]
density = uniform
lo = 0.0
hi = 1.0

[joint.0]
labels = step
threshold = 0.5
low = 0.0
high = 1.0

[joint.1]
density = truncgauss
mu = 0.5
sigma = 0.5

[loss.0]
kind = zero-one
threshold = 0.5

[loss.1]
expr = z1

[inner.0]
spec = expectation
[inner.1]
spec = expectation
[outer.0]
spec = expectation
[outer.1]
spec = expectation

[thresholds]
c = 0.25

[grid]
actions = 0, 1

[sweep]
levels = 2, 4, 8, 16, 32, 64, 128
"""

CONVEX_REGRESSION_CONFIG = """\
# risk-neutral quadratic fit with a quadratic proximity constraint
[base]
density = uniform
lo = 0.0
hi = 1.0
level = 6

[joint.0]
labels = affine
intercept = 0.0
slope = 1.0

[joint.1]
labels = const
value = 0.5

[loss.0]
kind = quad

[loss.1]
kind = quad

[inner.0]
spec = expectation
[inner.1]
spec = expectation
[outer.0]
spec = expectation
[outer.1]
spec = expectation

[thresholds]
c = 0.02

[grid]
actions = 0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2, 0.225, 0.25, 0.275, 0.3, 0.325, 0.35, 0.375, 0.4, 0.425, 0.45, 0.475, 0.5, 0.525, 0.55, 0.575, 0.6, 0.625, 0.65, 0.675, 0.7, 0.725, 0.75, 0.775, 0.8, 0.825, 0.85, 0.875, 0.9, 0.925, 0.95, 0.975, 1

[solver]
step0 = 2.0
iters = 2000
seed = 0
"""

RISK_MIX_CONFIG = """\
# tail-averse objective with a semideviation-priced constraint
[base]
points = 0, 0.5, 1
probs = 0.3, 0.45, 0.25

[joint.0]
labels.0 = -0.5:0.4, 0.5:0.6
labels.1 = 0:0.25, 0.5:0.5, 1:0.25
labels.2 = 0.5:0.3, 1.5:0.7

[joint.1]
probs = 0.5, 0.5, 0
labels.0 = 0:1
labels.1 = 1:0.5, 2:0.5

[loss.0]
kind = quad

[loss.1]
kind = abs-dev

[inner.0]
spec = cvar:0.5
[inner.1]
spec = musd:1:2
[outer.0]
spec = cvar:0.25
[outer.1]
spec = expectation

[thresholds]
c = 0.6

[grid]
actions = 0, 0.25, 0.5, 0.75, 1

[solver]
step0 = 1.0
iters = 800
seed = 0
"""

BUNDLED_CONFIGS: dict[str, str] = {
    "t1": T1_CONFIG,
    "vanishing-gap": VANISHING_GAP_CONFIG,
    "convex-regression": CONVEX_REGRESSION_CONFIG,
    "risk-mix": RISK_MIX_CONFIG,
}


def bundled_setup(name: str) -> RunSetup:
    return load_setup(BUNDLED_CONFIGS[name])


def t1_setup() -> RunSetup:
    return bundled_setup("t1")


def t1_tables():
    from .problem import lower

    return lower(t1_setup().instance())
