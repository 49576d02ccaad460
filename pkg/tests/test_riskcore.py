import numpy as np
import pytest

from riskdual.errors import InvalidAlpha, InvalidSpec
from riskdual.riskcore import (
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
)
from riskdual.scenario import build_marginal

from helpers import cvar_grid_reference, random_marginal, risk_reference

UNIFORM4 = build_marginal([1, 2, 3, 4], [0.25] * 4)
Z4 = np.array([1.0, 2.0, 3.0, 4.0])


class TestEvaluate:
    def test_cvar_alpha_one_is_mean(self):
        assert evaluate(cvar(1.0), Z4, UNIFORM4) == pytest.approx(2.5, abs=1e-12)

    def test_cvar_half_against_grid_reference(self):
        ref = cvar_grid_reference(Z4, UNIFORM4.probs, 0.5)
        assert ref == pytest.approx(3.5, abs=1e-5)
        assert evaluate(cvar(0.5), Z4, UNIFORM4) == pytest.approx(3.5, abs=1e-12)

    def test_mad_example(self):
        m = build_marginal([0, 2], [0.5, 0.5])
        z = np.array([0.0, 2.0])
        # E = 1, E|z - 1| = 1
        assert evaluate(mad(0.5), z, m) == pytest.approx(1.5, abs=1e-12)

    def test_musd_example(self):
        m = build_marginal([0, 2], [0.5, 0.5])
        z = np.array([0.0, 2.0])
        # E = 1 plus upper semideviation 0.5
        assert evaluate(musd(1.0, 1.0), z, m) == pytest.approx(1.5, abs=1e-12)

    def test_mad_zero_coefficient_is_mean(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            m = random_marginal(rng, int(rng.integers(2, 9)))
            z = rng.uniform(-3, 3, m.size)
            assert evaluate(mad(0.0), z, m) == pytest.approx(float(m.probs @ z), abs=1e-12)

    def test_against_plain_python_reference(self):
        rng = np.random.default_rng(1)
        specs = [expectation(), cvar(0.3), cvar(0.85), mad(0.4), musd(0.7, 2.0)]
        for _ in range(200):
            m = random_marginal(rng, int(rng.integers(2, 17)))
            z = rng.uniform(-5, 5, m.size)
            for spec in specs:
                assert evaluate(spec, z, m) == pytest.approx(
                    risk_reference(spec, z, m.probs), abs=1e-10
                )

    def test_gmsd_variants(self):
        m = build_marginal([0, 2], [0.5, 0.5])
        z = np.array([0.0, 2.0])
        # relu rfun coincides with musd
        assert evaluate(gmsd("relu", 1.0, 1.0), z, m) == evaluate(musd(1.0, 1.0), z, m)
        # square-relu positive parts are (0, 1): 1 + 0.5 * E[(0, 1)] = 1.25
        assert evaluate(gmsd("square-relu", 0.5, 1.0), z, m) == pytest.approx(1.25, abs=1e-12)

    def test_constant_cost_returns_constant(self):
        m = build_marginal([0, 1, 2], [0.2, 0.5, 0.3])
        z = np.full(3, 7.25)
        for spec in [expectation(), cvar(0.3), cvar(1.0), mad(0.5), musd(1.0, 2.0)]:
            assert evaluate(spec, z, m) == pytest.approx(7.25, abs=1e-10)

    def test_coherent_specs_dominate_mean(self):
        rng = np.random.default_rng(2)
        specs = [cvar(0.2), cvar(0.9), mad(0.5), musd(1.0, 1.0), musd(0.5, 2.0)]
        for _ in range(300):
            m = random_marginal(rng, int(rng.integers(2, 17)))
            z = rng.uniform(-5, 5, m.size)
            mean = float(m.probs @ z)
            for spec in specs:
                assert evaluate(spec, z, m) >= mean - 1e-10

    def test_cvar_monotone_in_alpha(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            m = random_marginal(rng, int(rng.integers(2, 9)))
            z = rng.uniform(-5, 5, m.size)
            a1, a2 = sorted(rng.uniform(0.05, 1.0, 2))
            assert evaluate(cvar(a1), z, m) >= evaluate(cvar(a2), z, m) - 1e-10

    def test_random_cost_wrapper_accepted(self):
        from riskdual.riskcore import RandomCost

        z = RandomCost(values=Z4)
        assert evaluate(cvar(0.5), z, UNIFORM4) == pytest.approx(3.5, abs=1e-12)
        value, _ = cvar_envelope(0.5, z, UNIFORM4)
        assert value == pytest.approx(3.5, abs=1e-12)
        with pytest.raises(InvalidSpec):
            RandomCost(values=np.array([1.0, np.inf]))

    def test_cvar_tiny_alpha_returns_max(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            m = random_marginal(rng, int(rng.integers(2, 9)))
            z = rng.uniform(-5, 5, m.size)
            alpha = float(m.probs.min()) * rng.uniform(0.1, 1.0)
            assert evaluate(cvar(alpha), z, m) == pytest.approx(float(z.max()), abs=1e-10)


class TestSpecValidation:
    def test_alpha_range(self):
        with pytest.raises(InvalidAlpha):
            cvar(0.0)
        with pytest.raises(InvalidAlpha):
            cvar(1.5)

    def test_coherence_flags(self):
        assert expectation().coherent
        assert cvar(0.3).coherent
        assert mad(0.5).coherent and not mad(0.6).coherent
        assert musd(1.0, 2.0).coherent and not musd(1.1, 2.0).coherent
        assert not gmsd("abs", 0.1, 1.0).coherent

    def test_unknown_rfun(self):
        with pytest.raises(InvalidSpec):
            gmsd("cube", 0.5, 1.0)

    @pytest.mark.parametrize(
        "text",
        ["expectation", "cvar:0.1", "mad:0.5", "musd:1.0:1", "gmsd:abs:0.5:1", "cvar:1"],
    )
    def test_parse_format_roundtrip(self, text):
        spec = parse_risk_spec(text)
        assert parse_risk_spec(format_risk_spec(spec)) == spec

    @pytest.mark.parametrize("text", ["cvar", "cvar:a", "mad:0.5:1", "nope:1", "gmsd:abs:1"])
    def test_parse_rejects_malformed(self, text):
        with pytest.raises(InvalidSpec):
            parse_risk_spec(text)


class TestEnvelope:
    def test_greedy_alpha_half(self):
        value, element = cvar_envelope(0.5, Z4, UNIFORM4)
        assert value == pytest.approx(3.5, abs=1e-12)
        assert element.zeta.tolist() == [0.0, 0.0, 2.0, 2.0]

    def test_alpha_one_collapses_to_unit_density(self):
        value, element = cvar_envelope(1.0, Z4, UNIFORM4)
        assert element.zeta.tolist() == [1.0, 1.0, 1.0, 1.0]
        assert value == pytest.approx(2.5, abs=1e-12)

    def test_quarter_mass_on_worst_atom(self):
        value, element = cvar_envelope(0.25, Z4, UNIFORM4)
        assert value == pytest.approx(4.0, abs=1e-12)
        assert element.zeta.tolist() == [0.0, 0.0, 0.0, 4.0]

    def test_invalid_alpha(self):
        with pytest.raises(InvalidAlpha):
            cvar_envelope(0.0, Z4, UNIFORM4)

    def test_dual_equals_variational_random(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            m = random_marginal(rng, int(rng.integers(2, 17)))
            z = rng.uniform(-5, 5, m.size)
            alpha = float(rng.uniform(0.05, 1.0))
            value, element = cvar_envelope(alpha, z, m)
            assert abs(value - evaluate(cvar(alpha), z, m)) <= 1e-8
            assert float(m.probs @ element.zeta) == pytest.approx(1.0, abs=1e-10)
            assert np.all(element.zeta >= 0.0)
            assert np.all(element.zeta <= 1.0 / alpha)

    def test_ties_broken_by_ascending_index(self):
        m = build_marginal([0, 1, 2, 3], [0.25] * 4)
        z = np.array([2.0, 2.0, 1.0, 0.0])
        _, element = cvar_envelope(0.25, z, m)
        assert element.zeta.tolist() == [4.0, 0.0, 0.0, 0.0]


class TestAxiomReport:
    def test_cvar_clean(self):
        rep = axiom_report(cvar(0.3), trials=1000, seed=0)
        assert rep.coherent
        assert rep.worst <= 1e-9

    def test_expectation_homogeneity_zero(self):
        rep = axiom_report(expectation(), trials=200, seed=1)
        assert rep.homogeneity <= 1e-12

    def test_gmsd_flagged_and_may_violate(self):
        rep = axiom_report(gmsd("square-relu", 1.0, 1.0), trials=500, seed=2)
        assert not rep.coherent
        assert rep.monotonicity is None and rep.translation is None
        # square-relu breaks positive homogeneity outright
        assert rep.homogeneity > 1e-6

    def test_seed_determinism(self):
        a = axiom_report(musd(1.0, 2.0), trials=100, seed=42)
        b = axiom_report(musd(1.0, 2.0), trials=100, seed=42)
        assert a == b

    def test_trials_validation(self):
        with pytest.raises(InvalidSpec):
            axiom_report(expectation(), trials=0, seed=0)
