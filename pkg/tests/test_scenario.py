import numpy as np
import pytest

from riskdual.errors import (
    DuplicatePoint,
    NonPositiveProb,
    ProbSumMismatch,
    SupportViolation,
    UnsupportedDensity,
)
from riskdual.scenario import (
    RefinementFamily,
    build_marginal,
    compute_weights,
    make_density,
    make_label_rule,
    refine,
)

from helpers import random_marginal, random_weights


class TestBuildMarginal:
    def test_uniform_two_point(self):
        m = build_marginal([0, 1], [0.5, 0.5])
        assert m.size == 2
        assert m.points == ((0.0,), (1.0,))
        assert m.probs.tolist() == [0.5, 0.5]

    def test_sum_mismatch(self):
        with pytest.raises(ProbSumMismatch):
            build_marginal([0, 1], [0.5, 0.6])

    def test_zero_atom_forbidden(self):
        with pytest.raises(NonPositiveProb):
            build_marginal([0, 1], [1.0, 0.0])

    def test_negative_prob(self):
        with pytest.raises(NonPositiveProb):
            build_marginal([0, 1], [1.5, -0.5])

    def test_duplicate_points(self):
        with pytest.raises(DuplicatePoint):
            build_marginal([0, 0], [0.5, 0.5])

    def test_vector_points(self):
        m = build_marginal([(0, 1), (1, 0)], [0.25, 0.75])
        assert m.points == ((0.0, 1.0), (1.0, 0.0))


class TestComputeWeights:
    def test_definitional_ratio(self):
        base = build_marginal([0, 1], [0.5, 0.5])
        other = build_marginal([0, 1], [0.25, 0.75])
        w = compute_weights(base, other)
        assert w.w.tolist() == [0.5, 1.5]

    def test_identity_weights_exact(self):
        base = build_marginal([0, 1, 2], [0.2, 0.3, 0.5])
        w = compute_weights(base, base)
        assert w.w.tolist() == [1.0, 1.0, 1.0]

    def test_off_support_atom(self):
        base = build_marginal([0, 1], [0.5, 0.5])
        other = build_marginal([0, 2], [0.5, 0.5])
        with pytest.raises(SupportViolation):
            compute_weights(base, other)

    def test_subset_support_zero_fill(self):
        base = build_marginal([0, 1, 2], [0.25, 0.5, 0.25])
        other = build_marginal([0, 2], [0.4, 0.6])
        w = compute_weights(base, other)
        assert w.w[1] == 0.0
        assert abs(float(base.probs @ w.w) - 1.0) <= 1e-10

    def test_random_pairs_unit_mass(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            base = random_marginal(rng, int(rng.integers(2, 9)))
            w = random_weights(rng, base)
            assert abs(float(base.probs @ w.w) - 1.0) <= 1e-10


class TestRefine:
    def test_uniform_level_2(self):
        fam = RefinementFamily(make_density("uniform", lo=0, hi=1), make_label_rule("const"))
        joint = refine(fam, 2)
        assert joint.marginal.points == ((0.25,), (0.75,))
        assert joint.marginal.probs.tolist() == [0.5, 0.5]

    def test_uniform_level_4(self):
        fam = RefinementFamily(make_density("uniform", lo=0, hi=1), make_label_rule("const"))
        joint = refine(fam, 4)
        assert joint.marginal.probs.tolist() == [0.25, 0.25, 0.25, 0.25]

    def test_truncgauss_symmetric(self):
        fam = RefinementFamily(
            make_density("truncgauss", mu=0.5, sigma=0.2, lo=0, hi=1), make_label_rule("const")
        )
        joint = refine(fam, 2)
        assert joint.marginal.probs[0] == pytest.approx(0.5, abs=1e-12)
        assert joint.marginal.probs[1] == pytest.approx(0.5, abs=1e-12)

    def test_unknown_density(self):
        with pytest.raises(UnsupportedDensity):
            make_density("cauchy", lo=0, hi=1)

    @pytest.mark.parametrize("n", [1, 2, 3, 7, 16, 33])
    def test_marginal_invariants_at_every_level(self, n):
        fam = RefinementFamily(
            make_density("truncgauss", mu=0.3, sigma=0.4, lo=-1, hi=2),
            make_label_rule("step", threshold=0.5),
        )
        joint = refine(fam, n)
        assert joint.marginal.size == n
        assert abs(float(joint.marginal.probs.sum()) - 1.0) <= 1e-12
        assert np.all(joint.marginal.probs > 0)

    @pytest.mark.parametrize("n", [4, 8, 32, 128])
    def test_uniform_subinterval_mass_converges(self, n):
        # mass of [a, b] from cells whose midpoint falls inside, vs exact b - a
        a, b = 0.2, 0.7
        fam = RefinementFamily(make_density("uniform", lo=0, hi=1), make_label_rule("const"))
        joint = refine(fam, n)
        xs = np.array([pt[0] for pt in joint.marginal.points])
        mass = float(joint.marginal.probs[(xs >= a) & (xs <= b)].sum())
        assert abs(mass - (b - a)) <= 1.0 / n

    def test_label_rules(self):
        step = make_label_rule("step", threshold=0.5, low=0.0, high=1.0)
        assert step(0.25) == [(0.0, 1.0)]
        assert step(0.75) == [(1.0, 1.0)]
        affine = make_label_rule("affine", intercept=1.0, slope=2.0)
        assert affine(0.5) == [(2.0, 1.0)]
        bern = make_label_rule("bern", y0=0.0, y1=1.0, p_lo=0.2, p_hi=0.8, lo=0.0, hi=1.0)
        rows = bern(0.5)
        assert len(rows) == 2
        assert rows[0][1] + rows[1][1] == pytest.approx(1.0, abs=1e-12)
