"""Line-oriented configuration format: ``key = value`` pairs under ``[section]``.

Sections
--------
``[base]``        explicit ``points``/``probs`` lists, or a ``density`` name
                  with parameters (``lo``, ``hi``, ``mu``, ``sigma``) plus an
                  optional default ``level``.
``[joint.i]``     i = 0..m.  Explicit instances: optional ``probs`` aligned
                  with the base points (zeros drop support) and per-scenario
                  ``labels.<j> = y:p, y:p`` rows.  Density-based instances:
                  optional ``density`` (+ params) and a ``labels = <rule>``
                  label rule with its parameters.  Omitted sections default
                  to the base marginal with point-mass label 0.
``[loss.i]``      ``kind = <registry name>`` with numeric parameters, or
                  ``expr = <expression>``.
``[inner.i]``     ``spec = <risk spec>`` (see riskcore textual form).
``[outer.i]``     same.
``[thresholds]``  ``c = c1, c2, ...`` (defines m).
``[grid]``        ``actions = a1, a2, ...`` (scalar actions).
``[solver]``      ``step0``, ``iters``, ``seed``, ``anchor_cap``,
                  ``slater_margin`` (all optional).
``[oracle]``      ``max_policies``, ``lambda_lo``, ``lambda_hi``,
                  ``lambda_step`` (all optional).
``[sweep]``       ``levels = 2, 4, 8, ...`` (refinement levels).

``#`` starts a comment.  All parse and validation errors carry the line and
column of the offending value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .condrisk import build_grid
from .errors import ConfigError, RiskDualError
from .losses import LossSpec, expr_loss, registry_loss
from .oracle import OracleBudget
from .problem import InstanceFamily, RCLInstance
from .riskcore import RiskSpec, parse_risk_spec
from .scenario import (
    Density,
    LabelRule,
    build_conditional,
    build_marginal,
    JointModel,
    make_density,
    make_label_rule,
)


@dataclass(frozen=True)
class ConfigItem:
    value: str
    line: int
    col: int


@dataclass
class ConfigDocument:
    sections: dict[str, dict[str, ConfigItem]] = field(default_factory=dict)
    section_lines: dict[str, int] = field(default_factory=dict)
    n_lines: int = 0


def parse_config(text: str) -> ConfigDocument:
    doc = ConfigDocument()
    current: str | None = None
    lines = text.splitlines()
    doc.n_lines = len(lines)
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("["):
            if not stripped.endswith("]") or len(stripped) < 3:
                raise ConfigError("malformed section header", lineno, indent + 1)
            name = stripped[1:-1].strip()
            if name in doc.sections:
                raise ConfigError(f"duplicate section [{name}]", lineno, indent + 1)
            doc.sections[name] = {}
            doc.section_lines[name] = lineno
            current = name
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", lineno, indent + 1)
        if current is None:
            raise ConfigError("key outside any [section]", lineno, indent + 1)
        key, _, value = line.partition("=")
        key_text = key.strip()
        if not key_text:
            raise ConfigError("empty key", lineno, indent + 1)
        if key_text in doc.sections[current]:
            raise ConfigError(f"duplicate key {key_text!r} in [{current}]", lineno, indent + 1)
        # 1-based column of the value's first character
        value_col = len(key) + 1 + (len(value) - len(value.lstrip())) + 1
        doc.sections[current][key_text] = ConfigItem(
            value=value.strip(), line=lineno, col=value_col
        )
    return doc


def serialize_config(doc: ConfigDocument) -> str:
    out: list[str] = []
    for name, items in doc.sections.items():
        out.append(f"[{name}]")
        for key, item in items.items():
            out.append(f"{key} = {item.value}")
        out.append("")
    return "\n".join(out)


# --- typed extraction -------------------------------------------------------------

def _require_section(doc: ConfigDocument, name: str) -> dict[str, ConfigItem]:
    if name not in doc.sections:
        raise ConfigError(f"missing required section [{name}]", doc.n_lines + 1, 1)
    return doc.sections[name]


def _float(item: ConfigItem) -> float:
    try:
        return float(item.value)
    except ValueError:
        raise ConfigError(f"expected a number, got {item.value!r}", item.line, item.col) from None


def _int(item: ConfigItem) -> int:
    try:
        return int(item.value)
    except ValueError:
        raise ConfigError(f"expected an integer, got {item.value!r}", item.line, item.col) from None


def _float_list(item: ConfigItem) -> list[float]:
    parts = [p.strip() for p in item.value.split(",") if p.strip()]
    if not parts:
        raise ConfigError("expected a comma-separated list", item.line, item.col)
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad list entry in {item.value!r}", item.line, item.col) from None


def _int_list(item: ConfigItem) -> list[int]:
    return [int(v) for v in _float_list(item)]


def _label_rows(item: ConfigItem) -> list[tuple[float, float]]:
    rows = []
    for part in item.value.split(","):
        part = part.strip()
        if not part:
            continue
        pieces = part.split(":")
        if len(pieces) != 2:
            raise ConfigError(f"label entry must be 'value:prob', got {part!r}", item.line, item.col)
        try:
            rows.append((float(pieces[0]), float(pieces[1])))
        except ValueError:
            raise ConfigError(f"bad label entry {part!r}", item.line, item.col) from None
    if not rows:
        raise ConfigError("empty label distribution", item.line, item.col)
    return rows


_NUMERIC_PARAMS = ("threshold", "cap", "amplitude", "frequency")
_RULE_PARAMS = ("threshold", "low", "high", "value", "intercept", "slope", "y0", "y1", "p_lo", "p_hi")


@dataclass(frozen=True)
class SolverParams:
    step0: float = 1.0
    iters: int = 500
    seed: int = 0
    anchor_cap: int = 100_000
    slater_margin: float = 1e-9


@dataclass
class RunSetup:
    """Everything a run needs: the problem plus solver and oracle parameters."""

    doc: ConfigDocument
    explicit: RCLInstance | None
    family: InstanceFamily | None
    default_level: int | None
    solver: SolverParams
    budget: OracleBudget
    sweep_levels: tuple[int, ...]

    def instance(self, level: int | None = None) -> RCLInstance:
        if self.explicit is not None:
            return self.explicit
        n = level if level is not None else self.default_level
        if n is None:
            raise ConfigError(
                "density-based config needs a refinement level "
                "(set 'level' in [base], a [sweep] section, or pass --level)"
            )
        return self.family.materialize(n)


def _wrap(exc: RiskDualError, item: ConfigItem) -> ConfigError:
    return ConfigError(str(exc), item.line, item.col)


def build_setup(doc: ConfigDocument) -> RunSetup:
    base_sec = _require_section(doc, "base")
    thr_sec = _require_section(doc, "thresholds")
    grid_sec = _require_section(doc, "grid")

    if "c" not in thr_sec:
        raise ConfigError("[thresholds] needs 'c = ...'", doc.section_lines["thresholds"], 1)
    thresholds = _float_list(thr_sec["c"])
    m = len(thresholds)

    if "actions" not in grid_sec:
        raise ConfigError("[grid] needs 'actions = ...'", doc.section_lines["grid"], 1)
    grid = build_grid(_float_list(grid_sec["actions"]))

    losses: list[LossSpec] = []
    inner: list[RiskSpec] = []
    outer: list[RiskSpec] = []
    for i in range(m + 1):
        losses.append(_build_loss(_require_section(doc, f"loss.{i}"), doc, f"loss.{i}"))
        inner.append(_build_spec(_require_section(doc, f"inner.{i}"), doc, f"inner.{i}"))
        outer.append(_build_spec(_require_section(doc, f"outer.{i}"), doc, f"outer.{i}"))

    solver = _build_solver(doc.sections.get("solver", {}))
    budget = _build_budget(doc.sections.get("oracle", {}))
    sweep_levels: tuple[int, ...] = ()
    if "sweep" in doc.sections and "levels" in doc.sections["sweep"]:
        sweep_levels = tuple(_int_list(doc.sections["sweep"]["levels"]))

    if "points" in base_sec:
        explicit = _build_explicit(doc, base_sec, m, losses, inner, outer, thresholds, grid)
        return RunSetup(
            doc=doc,
            explicit=explicit,
            family=None,
            default_level=None,
            solver=solver,
            budget=budget,
            sweep_levels=sweep_levels,
        )

    family, level = _build_family(doc, base_sec, m, losses, inner, outer, thresholds, grid)
    if level is None and sweep_levels:
        level = sweep_levels[0]
    return RunSetup(
        doc=doc,
        explicit=None,
        family=family,
        default_level=level,
        solver=solver,
        budget=budget,
        sweep_levels=sweep_levels,
    )


def load_setup(text: str) -> RunSetup:
    return build_setup(parse_config(text))


def _build_loss(sec: dict[str, ConfigItem], doc: ConfigDocument, name: str) -> LossSpec:
    if "expr" in sec:
        item = sec["expr"]
        try:
            return expr_loss(item.value)
        except RiskDualError as exc:
            raise _wrap(exc, item) from exc
    if "kind" not in sec:
        raise ConfigError(f"[{name}] needs 'kind = ...' or 'expr = ...'", doc.section_lines[name], 1)
    item = sec["kind"]
    params = {key: _float(sec[key]) for key in _NUMERIC_PARAMS if key in sec}
    try:
        return registry_loss(item.value, **params)
    except RiskDualError as exc:
        raise _wrap(exc, item) from exc


def _build_spec(sec: dict[str, ConfigItem], doc: ConfigDocument, name: str) -> RiskSpec:
    if "spec" not in sec:
        raise ConfigError(f"[{name}] needs 'spec = ...'", doc.section_lines[name], 1)
    item = sec["spec"]
    try:
        return parse_risk_spec(item.value)
    except RiskDualError as exc:
        raise _wrap(exc, item) from exc


def _build_solver(sec: dict[str, ConfigItem]) -> SolverParams:
    return SolverParams(
        step0=_float(sec["step0"]) if "step0" in sec else 1.0,
        iters=_int(sec["iters"]) if "iters" in sec else 500,
        seed=_int(sec["seed"]) if "seed" in sec else 0,
        anchor_cap=_int(sec["anchor_cap"]) if "anchor_cap" in sec else 100_000,
        slater_margin=_float(sec["slater_margin"]) if "slater_margin" in sec else 1e-9,
    )


def _build_budget(sec: dict[str, ConfigItem]) -> OracleBudget:
    lo = _float(sec["lambda_lo"]) if "lambda_lo" in sec else 0.0
    hi = _float(sec["lambda_hi"]) if "lambda_hi" in sec else 3.0
    step = _float(sec["lambda_step"]) if "lambda_step" in sec else 1e-3
    max_policies = _int(sec["max_policies"]) if "max_policies" in sec else 1_000_000
    return OracleBudget(max_policies=max_policies, lambda_grid=(lo, hi, step))


def _build_explicit(doc, base_sec, m, losses, inner, outer, thresholds, grid) -> RCLInstance:
    points_item = base_sec["points"]
    if "probs" not in base_sec:
        raise ConfigError("[base] with points needs 'probs'", points_item.line, points_item.col)
    points = _float_list(points_item)
    probs = _float_list(base_sec["probs"])
    try:
        base = build_marginal(points, probs)
    except RiskDualError as exc:
        raise _wrap(exc, base_sec["probs"]) from exc

    joints: list[JointModel] = []
    for i in range(m + 1):
        sec = doc.sections.get(f"joint.{i}", {})
        joints.append(_build_explicit_joint(sec, base, i))
    try:
        return RCLInstance(
            base=base,
            joints=tuple(joints),
            losses=tuple(losses),
            inner=tuple(inner),
            outer=tuple(outer),
            thresholds=np.asarray(thresholds, dtype=float),
            grid=grid,
        )
    except RiskDualError as exc:
        raise ConfigError(str(exc), doc.n_lines + 1, 1) from exc


def _build_explicit_joint(sec: dict[str, ConfigItem], base, i: int) -> JointModel:
    if "probs" in sec:
        item = sec["probs"]
        probs = _float_list(item)
        if len(probs) != base.size:
            raise ConfigError(
                f"[joint.{i}] probs must have {base.size} entries (zeros drop support)",
                item.line,
                item.col,
            )
        support = [(pt, p) for pt, p in zip(base.points, probs) if p > 0.0]
        try:
            marginal = build_marginal([pt for pt, _ in support], [p for _, p in support])
        except RiskDualError as exc:
            raise _wrap(exc, item) from exc
    else:
        marginal = base

    base_index = {pt: j for j, pt in enumerate(base.points)}
    rows = []
    label_items = {key: item for key, item in sec.items() if key.startswith("labels.")}
    for pt in marginal.points:
        j = base_index[pt]
        key = f"labels.{j}"
        if key in label_items:
            rows.append(_label_rows(label_items[key]))
        elif label_items:
            any_item = next(iter(label_items.values()))
            raise ConfigError(
                f"[joint.{i}] missing labels.{j} for base scenario {j}",
                any_item.line,
                any_item.col,
            )
        else:
            rows.append([(0.0, 1.0)])
    try:
        conditional = build_conditional(rows)
        return JointModel(marginal=marginal, conditional=conditional)
    except RiskDualError as exc:
        item = next(iter(label_items.values()), ConfigItem("", 0, 0))
        raise _wrap(exc, item) from exc


def _build_family(doc, base_sec, m, losses, inner, outer, thresholds, grid):
    if "density" not in base_sec:
        raise ConfigError(
            "[base] needs either 'points'/'probs' or 'density'",
            doc.section_lines["base"],
            1,
        )
    density_item = base_sec["density"]
    lo = _float(base_sec["lo"]) if "lo" in base_sec else 0.0
    hi = _float(base_sec["hi"]) if "hi" in base_sec else 1.0
    base_density = _make_density(base_sec, density_item, lo, hi)
    level = _int(base_sec["level"]) if "level" in base_sec else None

    joint_densities: list[Density] = []
    rules: list[LabelRule] = []
    for i in range(m + 1):
        sec = doc.sections.get(f"joint.{i}", {})
        if "density" in sec:
            joint_densities.append(_make_density(sec, sec["density"], lo, hi))
        else:
            joint_densities.append(base_density)
        if "labels" in sec:
            item = sec["labels"]
            params = {key: _float(sec[key]) for key in _RULE_PARAMS if key in sec}
            params.setdefault("lo", lo)
            params.setdefault("hi", hi)
            try:
                rules.append(make_label_rule(item.value, **params))
            except RiskDualError as exc:
                raise _wrap(exc, item) from exc
        else:
            rules.append(make_label_rule("const", value=0.0))

    family = InstanceFamily(
        base_density=base_density,
        joint_densities=tuple(joint_densities),
        label_rules=tuple(rules),
        losses=tuple(losses),
        inner=tuple(inner),
        outer=tuple(outer),
        thresholds=tuple(thresholds),
        grid=grid,
        levels=(),
    )
    return family, level


def _make_density(sec: dict[str, ConfigItem], item: ConfigItem, lo: float, hi: float) -> Density:
    params: dict[str, float] = {"lo": lo, "hi": hi}
    for key in ("mu", "sigma"):
        if key in sec:
            params[key] = _float(sec[key])
    try:
        return make_density(item.value, **params)
    except RiskDualError as exc:
        raise _wrap(exc, item) from exc
