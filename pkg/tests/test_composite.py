import numpy as np
import pytest

from riskdual.composite import CompositeFunctional, compose, reweighted_compose
from riskdual.condrisk import CostTable
from riskdual.errors import AlignmentError
from riskdual.riskcore import cvar, expectation, mad, musd
from riskdual.scenario import WeightVector, build_marginal

from helpers import random_marginal, random_weights


def make_cf(outer, entries, w, base):
    return CompositeFunctional(
        outer=outer,
        table=CostTable(entries=np.asarray(entries, dtype=float)),
        weights=WeightVector(w=np.asarray(w, dtype=float)),
        base=base,
    )


class TestCompose:
    def test_t1_objective_policy_00(self):
        base = build_marginal([0, 1], [0.5, 0.5])
        table = CostTable(entries=np.array([[0.0, 1.0], [1.0, 0.0]]))
        # brute-force reference: 0.5 * 0 + 0.5 * 1
        assert compose(expectation(), table, base, [0, 0]) == pytest.approx(0.5, abs=1e-12)

    def test_cvar_one_equals_expectation(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            m = random_marginal(rng, int(rng.integers(2, 9)))
            table = CostTable(entries=rng.uniform(0, 3, (m.size, 3)))
            policy = rng.integers(0, 3, m.size)
            assert compose(cvar(1.0), table, m, policy) == pytest.approx(
                compose(expectation(), table, m, policy), abs=1e-12
            )

    def test_constant_column_returns_constant(self):
        m = build_marginal([0, 1, 2], [0.3, 0.3, 0.4])
        table = CostTable(entries=np.full((3, 2), 4.5))
        for outer in [expectation(), cvar(0.3), mad(0.5), musd(1.0, 2.0)]:
            assert compose(outer, table, m, [0, 1, 0]) == pytest.approx(4.5, abs=1e-10)

    def test_policy_alignment_checked(self):
        m = build_marginal([0, 1], [0.5, 0.5])
        table = CostTable(entries=np.zeros((2, 2)))
        with pytest.raises(AlignmentError):
            compose(expectation(), table, m, [0])
        with pytest.raises(AlignmentError):
            compose(expectation(), table, m, [0, 5])


class TestReweighted:
    def test_identity_weights_match_exactly(self):
        rng = np.random.default_rng(1)
        base = random_marginal(rng, 5)
        table = rng.uniform(0, 3, (5, 3))
        for outer in [expectation(), cvar(0.4), mad(0.3), musd(0.9, 2.0)]:
            cf = make_cf(outer, table, np.ones(5), base)
            policy = rng.integers(0, 3, 5)
            direct = compose(outer, cf.table, base, policy)
            assert reweighted_compose(cf, policy) == direct

    def test_expectation_hand_example(self):
        base = build_marginal([0, 1], [0.5, 0.5])
        cf = make_cf(expectation(), [[2.0], [4.0]], [0.5, 1.5], base)
        # 0.5*0.5*2 + 0.5*1.5*4 = 3.5 = expectation of (2, 4) under (0.25, 0.75)
        assert reweighted_compose(cf, [0, 0]) == pytest.approx(3.5, abs=1e-12)
        target = build_marginal([0, 1], [0.25, 0.75])
        assert compose(expectation(), cf.table, target, [0, 0]) == pytest.approx(3.5, abs=1e-12)

    @pytest.mark.parametrize(
        "outer_name", ["expectation", "cvar", "mad", "musd"]
    )
    def test_measure_change_equivalence(self, outer_name):
        rng = np.random.default_rng(hash(outer_name) % 2**32)
        for _ in range(1000):
            n = int(rng.integers(2, 33))
            base = random_marginal(rng, n)
            q = rng.uniform(0.1, 1.0, n)
            q /= q.sum()
            w = q / base.probs
            if outer_name == "expectation":
                outer = expectation()
            elif outer_name == "cvar":
                outer = cvar(float(rng.uniform(0.1, 1.0)))
            elif outer_name == "mad":
                outer = mad(float(rng.uniform(0.0, 0.5)))
            else:
                outer = musd(float(rng.uniform(0.0, 1.0)), float(rng.choice([1.0, 2.0])))
            a = int(rng.integers(1, 5))
            table = rng.uniform(-2, 5, (n, a))
            policy = rng.integers(0, a, n)
            cf = make_cf(outer, table, w, base)
            target = build_marginal([pt[0] for pt in base.points], q)
            direct = compose(outer, cf.table, target, policy)
            assert abs(reweighted_compose(cf, policy) - direct) <= 1e-9

    def test_positive_homogeneity(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(2, 17))
            base = random_marginal(rng, n)
            w = random_weights(rng, base)
            table = rng.uniform(0, 3, (n, 2))
            policy = rng.integers(0, 2, n)
            scale = float(rng.uniform(0.1, 10))
            for outer in [expectation(), cvar(0.3), mad(0.5), musd(1.0, 2.0)]:
                cf = make_cf(outer, table, w.w, base)
                cf_scaled = make_cf(outer, scale * table, w.w, base)
                assert abs(
                    reweighted_compose(cf_scaled, policy) - scale * reweighted_compose(cf, policy)
                ) <= 1e-9 * (1 + scale)

    def test_zero_weight_scenarios_never_matter(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            n = int(rng.integers(3, 9))
            base = random_marginal(rng, n)
            keep = rng.uniform(size=n) > 0.4
            if not keep.any():
                keep[0] = True
            q = np.where(keep, rng.uniform(0.1, 1.0, n), 0.0)
            q /= q.sum()
            w = q / base.probs
            table = rng.uniform(0, 3, (n, 2))
            altered = table.copy()
            altered[~keep] = rng.uniform(50, 90, (int((~keep).sum()), 2))
            policy = rng.integers(0, 2, n)
            for outer in [expectation(), cvar(0.4), mad(0.5), musd(1.0, 2.0)]:
                v1 = reweighted_compose(make_cf(outer, table, w, base), policy)
                v2 = reweighted_compose(make_cf(outer, altered, w, base), policy)
                assert abs(v1 - v2) <= 1e-12 * (1 + abs(v1))

    def test_cvar_hinge_applied_before_weighting(self):
        # the wrong order ((z*w - t)_+ instead of (z - t)_+ * w) must not match
        base = build_marginal([0, 1], [0.5, 0.5])
        w = np.array([0.5, 1.5])
        table = np.array([[2.0], [4.0]])
        cf = make_cf(cvar(0.5), table, w, base)
        value = reweighted_compose(cf, [0, 0])
        target = build_marginal([0, 1], [0.25, 0.75])
        assert value == pytest.approx(compose(cvar(0.5), cf.table, target, [0, 0]), abs=1e-12)
        # wrong-order reference: min_t t + 2 * E_base[(z*w - t)_+]
        zw = table[:, 0] * w
        wrong = min(t + 2.0 * float(base.probs @ np.maximum(zw - t, 0.0)) for t in zw)
        assert abs(value - wrong) > 0.1
