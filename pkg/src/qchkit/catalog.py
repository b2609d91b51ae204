"""Built-in fixtures: chart files shipped as package resources plus expectations.

Each resource is a chart file (see :mod:`qchkit.chart`) with extra fields:

``expect``
    list of ``{"check", "verdict": "pass"|"fail", "tol"}``.
``expected_coeffs``
    optional three expressions in the parameters giving (a, b, c).
``designated``
    optional ``{"point", "expect"}`` evaluated at one fixed point only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any, Mapping

import numpy as np

from . import dsl
from .chart import ChartSpec, chart_from_dict, validate_chart
from .checks import CHECKS
from .errors import BadParameter, ChartError, UnknownFixture

#: registration order, which is also the listing order
NAMES = ("flat_c2", "product_spheres", "fubini_study", "calabi", "calabi_general")
VERDICTS = ("pass", "fail")


@dataclass(frozen=True)
class Expectation:
    check: str
    verdict: str
    tol: float


@dataclass(frozen=True)
class FixtureDescriptor:
    name: str
    description: str
    params: Mapping[str, float]
    spec: ChartSpec
    expect: tuple[Expectation, ...]
    expected_coeffs: tuple[float, float, float] | None = None
    designated_point: tuple[float, ...] | None = None
    designated_expect: tuple[Expectation, ...] = ()
    notes: tuple[str, ...] = ()

    @property
    def dist(self) -> tuple[dsl.Expr, ...] | None:
        return self.spec.dist

    def expectation(self, check: str) -> Expectation | None:
        for e in self.expect:
            if e.check == check:
                return e
        return None


def _expectations(entries, where: str) -> tuple[Expectation, ...]:
    out = []
    for raw in entries:
        e = Expectation(str(raw["check"]), str(raw["verdict"]), float(raw["tol"]))
        if e.check not in CHECKS:
            raise ChartError(f"{where}: unknown check {e.check!r}")
        if e.verdict not in VERDICTS:
            raise ChartError(f"{where}: verdict must be 'pass' or 'fail', got {e.verdict!r}")
        out.append(e)
    return tuple(out)


@lru_cache(maxsize=None)
def _raw(name: str) -> str:
    return resources.files("qchkit.fixtures").joinpath(f"{name}.json").read_text(encoding="utf-8")


def _data(name: str) -> dict[str, Any]:
    if name not in NAMES:
        raise UnknownFixture(name)
    return json.loads(_raw(name))


def get(name: str, params: Mapping[str, float] | None = None) -> FixtureDescriptor:
    """Instantiate fixture ``name`` with parameter overrides.

    Raises
    ------
    UnknownFixture
        ``name`` is not registered.
    BadParameter
        An override is undeclared or violates the parameter domain.
    """
    data = _data(name)
    declared = dict(data.get("params", {}))
    for k in params or {}:
        if k not in declared:
            raise BadParameter(f"fixture {name!r} has no parameter {k!r} (declared: {sorted(declared)})")
    spec = chart_from_dict(data, params)
    for c in spec.param_domain:
        if not c.holds((0.0, 0.0, 0.0, 0.0), spec.params):
            raise BadParameter(f"fixture {name!r}: parameter constraint {c.text!r} violated by {dict(spec.params)}")
    coeffs = None
    if data.get("expected_coeffs"):
        names = tuple(spec.params)
        coeffs = tuple(dsl.eval_value(dsl.parse(str(t), names), params=spec.params) for t in data["expected_coeffs"])
    designated = data.get("designated") or {}
    return FixtureDescriptor(
        name=name,
        description=str(data.get("description", "")),
        params=dict(spec.params),
        spec=spec,
        expect=_expectations(data.get("expect", ()), name),
        expected_coeffs=coeffs,
        designated_point=tuple(float(x) for x in designated["point"]) if designated else None,
        designated_expect=_expectations(designated.get("expect", ()), f"{name} designated"),
        notes=tuple(data.get("notes", ())),
    )


def list() -> list[dict[str, Any]]:  # noqa: A001 - mirrors the registry vocabulary
    """Names, descriptions and parameter schemas in registration order."""
    out = []
    for name in NAMES:
        data = _data(name)
        out.append(
            {
                "name": name,
                "description": data.get("description", ""),
                "params": {k: {"type": "number", "default": float(v)} for k, v in data.get("params", {}).items()},
                "param_domain": [str(c) for c in data.get("param_domain", ())],
                "checks": [e["check"] for e in data.get("expect", ())],
            }
        )
    return out


def sample_box(spec: ChartSpec) -> tuple[tuple[float, float], ...]:
    return spec.box if spec.box is not None else ((-1.0, 1.0),) * 4


def self_validate(fixture: FixtureDescriptor, n: int = 16, seed: int = 0) -> list:
    """Run :func:`validate_chart` on ``n`` points drawn from the default box."""
    rng = np.random.default_rng(seed)
    box = np.array(sample_box(fixture.spec))
    pts = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((n, 4))
    return validate_chart(fixture.spec, pts)
