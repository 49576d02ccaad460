import numpy as np
import pytest

from riskdual.bundled import (
    CONVEX_REGRESSION_CONFIG,
    RISK_MIX_CONFIG,
    T1_CONFIG,
    VANISHING_GAP_CONFIG,
)
from riskdual.configio import build_setup, load_setup, parse_config, serialize_config
from riskdual.errors import ConfigError


class TestParse:
    def test_t1_document_structure(self):
        doc = parse_config(T1_CONFIG)
        assert "base" in doc.sections
        assert doc.sections["thresholds"]["c"].value == "0.25"

    def test_positions_recorded(self):
        doc = parse_config("[base]\npoints = 0, 1\nprobs = 0.5, 0.5\n")
        item = doc.sections["base"]["probs"]
        assert item.line == 3
        assert item.col == 9

    def test_comments_stripped(self):
        doc = parse_config("# header\n[base]\npoints = 0, 1  # inline\n")
        assert doc.sections["base"]["points"].value == "0, 1"

    def test_malformed_line(self):
        with pytest.raises(ConfigError) as info:
            parse_config("[base]\nnonsense\n")
        assert info.value.line == 2

    def test_duplicate_key(self):
        with pytest.raises(ConfigError):
            parse_config("[base]\nlo = 0\nlo = 1\n")

    def test_duplicate_section(self):
        with pytest.raises(ConfigError):
            parse_config("[base]\n[base]\n")

    def test_key_outside_section(self):
        with pytest.raises(ConfigError):
            parse_config("lo = 1\n")


class TestBuild:
    def test_t1_instance_fields(self):
        setup = load_setup(T1_CONFIG)
        instance = setup.instance()
        assert instance.m == 1
        assert instance.base.points == ((0.0,), (1.0,))
        assert instance.grid.actions == ((0.0,), (1.0,))
        assert instance.thresholds.tolist() == [0.25]
        assert setup.solver.iters == 500

    def test_family_materializes(self):
        setup = load_setup(VANISHING_GAP_CONFIG)
        instance = setup.instance(4)
        assert instance.base.size == 4
        assert setup.sweep_levels == (2, 4, 8, 16, 32, 64, 128)

    def test_family_needs_level(self):
        text = VANISHING_GAP_CONFIG.replace("[sweep]\nlevels = 2, 4, 8, 16, 32, 64, 128\n", "")
        setup = load_setup(text)
        with pytest.raises(ConfigError):
            setup.instance()

    def test_default_level_from_base(self):
        setup = load_setup(CONVEX_REGRESSION_CONFIG)
        assert setup.instance().base.size == 6

    def test_missing_thresholds_positioned(self):
        text = T1_CONFIG.replace("[thresholds]\nc = 0.25\n", "")
        with pytest.raises(ConfigError) as info:
            load_setup(text)
        assert "[thresholds]" in info.value.message
        assert info.value.line is not None

    def test_bad_float_positioned(self):
        text = T1_CONFIG.replace("c = 0.25", "c = zebra")
        with pytest.raises(ConfigError) as info:
            load_setup(text)
        assert info.value.line is not None
        assert "zebra" in info.value.message

    def test_bad_risk_spec_positioned(self):
        text = T1_CONFIG.replace("[inner.0]\nspec = expectation", "[inner.0]\nspec = cvar:2.0")
        with pytest.raises(ConfigError) as info:
            load_setup(text)
        assert info.value.line is not None

    def test_unknown_density_positioned(self):
        text = VANISHING_GAP_CONFIG.replace("density = truncgauss", "density = pareto")
        with pytest.raises(ConfigError) as info:
            load_setup(text)
        assert "pareto" in info.value.message

    def test_bad_expression_positioned(self):
        text = T1_CONFIG.replace("expr = z1", "expr = relu(z1")
        with pytest.raises(ConfigError):
            load_setup(text)

    def test_zero_probs_drop_support(self):
        text = T1_CONFIG.replace(
            "[joint.0]\nlabels.0 = 0:1\nlabels.1 = 1:1",
            "[joint.0]\nlabels.0 = 0:1\nlabels.1 = 1:1\n\n[joint.1]\nprobs = 1.0, 0",
        )
        instance = load_setup(text).instance()
        assert instance.joints[1].marginal.size == 1

    def test_missing_label_row_positioned(self):
        text = T1_CONFIG.replace("labels.1 = 1:1\n", "")
        with pytest.raises(ConfigError) as info:
            load_setup(text)
        assert "labels.1" in info.value.message


class TestRoundTrip:
    @pytest.mark.parametrize(
        "config", [T1_CONFIG, VANISHING_GAP_CONFIG, CONVEX_REGRESSION_CONFIG, RISK_MIX_CONFIG]
    )
    def test_serialize_reparse_identical_instance(self, config):
        doc = parse_config(config)
        text = serialize_config(doc)
        first = build_setup(doc)
        second = build_setup(parse_config(text))
        level = 4 if first.explicit is None else None
        a = first.instance(level)
        b = second.instance(level)
        assert a.base.points == b.base.points
        assert a.base.probs.tolist() == b.base.probs.tolist()
        assert a.grid.actions == b.grid.actions
        assert a.thresholds.tolist() == b.thresholds.tolist()
        assert a.inner == b.inner
        assert a.outer == b.outer
        assert len(a.joints) == len(b.joints)
        for ja, jb in zip(a.joints, b.joints):
            assert ja.marginal.points == jb.marginal.points
            assert ja.marginal.probs.tolist() == jb.marginal.probs.tolist()
            assert ja.conditional.table == jb.conditional.table
        for la, lb in zip(a.losses, b.losses):
            assert la.kind == lb.kind
            assert la.params == lb.params
            assert la.expr_text == lb.expr_text
