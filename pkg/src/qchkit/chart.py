"""Chart specifications: metric and optional structure fields as DSL expressions.

JSON layout (all expression strings use the grammar in :mod:`qchkit.dsl`)::

    {
      "name": "calabi",
      "coords": ["x", "y", "z", "t"],
      "params": {"C": 1.0},
      "param_domain": ["C > 0"],           # optional
      "domain": ["z > 0"],
      "metric": [10 strings: g11 g12 g13 g14 g22 g23 g24 g33 g34 g44]
                | 4x4 nested list (must be symmetric),
      "omega": [6 strings: w12 w13 w14 w23 w24 w34] | 4x4 nested list,
      "J": 4x4 nested list (row a, column b = J^a_b),
      "Jbar": 4x4 nested list,
      "theta": [4 strings],                # covariant components
      "dist": [4 strings],                 # vector spanning D together with J dist
      "box": [[lo, hi], ... 4 pairs]       # default sample box
    }
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import dsl
from .errors import ChartError, DomainError, QCHError
from .jets import Jet

UPPER = tuple((i, j) for i in range(4) for j in range(i, 4))
STRICT_UPPER = tuple((i, j) for i in range(4) for j in range(i + 1, 4))
_CMP = re.compile(r"(<=|>=|<|>)")


@dataclass(frozen=True)
class Constraint:
    text: str
    lhs: dsl.Expr
    op: str
    rhs: dsl.Expr

    def holds(self, point: Sequence[float], params: Mapping[str, float]) -> bool:
        try:
            lv = dsl.eval_value(self.lhs, point, params)
            rv = dsl.eval_value(self.rhs, point, params)
        except DomainError:
            return False
        return {"<": lv < rv, "<=": lv <= rv, ">": lv > rv, ">=": lv >= rv}[self.op]


def parse_constraint(text: str, params=(), coords=()) -> Constraint:
    parts = _CMP.split(text)
    if len(parts) != 3:
        raise ChartError(f"constraint must have exactly one comparison: {text!r}")
    lhs, op, rhs = parts
    return Constraint(text, dsl.parse(lhs, params, coords), op, dsl.parse(rhs, params, coords))


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # "domain" | "not_positive_definite" | "evaluation"
    message: str
    point: tuple[float, ...] = ()


@dataclass(frozen=True)
class ChartSpec:
    name: str
    coords: tuple[str, ...]
    params: Mapping[str, float]
    domain: tuple[Constraint, ...]
    metric: tuple[tuple[dsl.Expr, ...], ...]  # full symmetric 4x4
    omega: tuple[tuple[dsl.Expr, ...], ...] | None = None  # full antisymmetric 4x4
    J: tuple[tuple[dsl.Expr, ...], ...] | None = None
    Jbar: tuple[tuple[dsl.Expr, ...], ...] | None = None
    theta: tuple[dsl.Expr, ...] | None = None
    dist: tuple[dsl.Expr, ...] | None = None
    param_domain: tuple[Constraint, ...] = ()
    box: tuple[tuple[float, float], ...] | None = None
    source: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    # --------------------------------------------------------------
    def contains(self, point: Sequence[float]) -> list[Constraint]:
        """Domain constraints violated at ``point``."""
        return [c for c in self.domain if not c.holds(point, self.params)]

    def _matrix_jet(self, rows, point, order) -> Jet:
        jets = [dsl.eval_jet(e, point, self.params, order) for row in rows for e in row]
        return Jet.stack(jets, (4, 4))

    def _vector_jet(self, exprs, point, order) -> Jet:
        return Jet.stack([dsl.eval_jet(e, point, self.params, order) for e in exprs])

    def metric_jet(self, point, order=2) -> Jet:
        return self._matrix_jet(self.metric, point, order)

    def omega_jet(self, point, order=2) -> Jet | None:
        return None if self.omega is None else self._matrix_jet(self.omega, point, order)

    def J_jet(self, point, order=2) -> Jet | None:
        return None if self.J is None else self._matrix_jet(self.J, point, order)

    def Jbar_jet(self, point, order=2) -> Jet | None:
        return None if self.Jbar is None else self._matrix_jet(self.Jbar, point, order)

    def theta_jet(self, point, order=2) -> Jet | None:
        return None if self.theta is None else self._vector_jet(self.theta, point, order)

    def dist_jet(self, point, order=2) -> Jet | None:
        return None if self.dist is None else self._vector_jet(self.dist, point, order)

    def metric_value(self, point) -> np.ndarray:
        return self.metric_jet(point, 1).v

    def with_metric_scale(self, s2: float) -> "ChartSpec":
        """Same chart with metric and Kähler form multiplied by the constant ``s2``."""
        def scale(rows):
            if rows is None:
                return None
            return tuple(tuple(dsl.BinOp("*", dsl.Num(float(s2)), e) for e in row) for row in rows)

        from dataclasses import replace

        theta = self.theta  # the Lee form is scale invariant
        return replace(self, metric=scale(self.metric), omega=scale(self.omega), theta=theta)


def _as_matrix(value, params, coords, what: str, symmetry: int):
    """Parse a 4x4 nested list or a packed triangle into a full 4x4 tuple of trees.

    ``symmetry`` is +1 (10 packed entries, symmetric), -1 (6 packed entries,
    antisymmetric) or 0 (must be a full 4x4 list).
    """
    zero = dsl.Num(0.0)

    def p(text):
        if not isinstance(text, (str, int, float)):
            raise ChartError(f"{what}: entries must be expression strings")
        try:
            return dsl.parse(str(text), params, coords)
        except QCHError as exc:
            raise ChartError(f"{what}: {str(text)!r}: {exc}") from exc

    if not isinstance(value, list):
        raise ChartError(f"{what}: expected a list")
    if value and all(isinstance(r, list) for r in value):
        if len(value) != 4 or any(len(r) != 4 for r in value):
            raise ChartError(f"{what}: nested form must be 4x4")
        rows = [[p(x) for x in r] for r in value]
        if symmetry == 1:
            for i, j in STRICT_UPPER:
                if rows[i][j] != rows[j][i]:
                    raise ChartError(f"{what}: component ({i + 1},{j + 1}) differs from ({j + 1},{i + 1})")
        if symmetry == -1:
            for i in range(4):
                if rows[i][i] != zero:
                    raise ChartError(f"{what}: diagonal entry ({i + 1},{i + 1}) must be 0")
            for i, j in STRICT_UPPER:
                if rows[j][i] != dsl.Func("neg", rows[i][j]) and rows[i][j] != dsl.Func("neg", rows[j][i]):
                    raise ChartError(f"{what}: component ({j + 1},{i + 1}) must be the negative of ({i + 1},{j + 1})")
        return tuple(tuple(r) for r in rows)
    if symmetry == 1 and len(value) == 10:
        rows = [[zero] * 4 for _ in range(4)]
        for (i, j), text in zip(UPPER, value):
            rows[i][j] = rows[j][i] = p(text)
        return tuple(tuple(r) for r in rows)
    if symmetry == -1 and len(value) == 6:
        rows = [[zero] * 4 for _ in range(4)]
        for (i, j), text in zip(STRICT_UPPER, value):
            e = p(text)
            rows[i][j] = e
            rows[j][i] = dsl.Func("neg", e)
        return tuple(tuple(r) for r in rows)
    raise ChartError(f"{what}: unexpected number of entries ({len(value)})")


def chart_from_dict(data: Mapping[str, Any], overrides: Mapping[str, float] | None = None) -> ChartSpec:
    """Build a :class:`ChartSpec` from the JSON object, applying parameter overrides."""
    if "metric" not in data:
        raise ChartError("chart has no 'metric' field")
    params = {str(k): float(v) for k, v in dict(data.get("params", {})).items()}
    for k, v in (overrides or {}).items():
        if k not in params:
            raise ChartError(f"unknown parameter {k!r} (declared: {sorted(params)})")
        params[k] = float(v)
    coords = tuple(data.get("coords", ("x1", "x2", "x3", "x4")))
    if len(coords) != 4:
        raise ChartError("exactly four coordinate names are required")
    names = list(params)
    try:
        metric = _as_matrix(data["metric"], names, coords, "metric", 1)
        omega = _as_matrix(data["omega"], names, coords, "omega", -1) if data.get("omega") else None
        J = _as_matrix(data["J"], names, coords, "J", 0) if data.get("J") else None
        Jbar = _as_matrix(data["Jbar"], names, coords, "Jbar", 0) if data.get("Jbar") else None
        theta = dist = None
        if data.get("theta"):
            if len(data["theta"]) != 4:
                raise ChartError("theta needs 4 components")
            theta = tuple(dsl.parse(str(t), names, coords) for t in data["theta"])
        if data.get("dist"):
            if len(data["dist"]) != 4:
                raise ChartError("dist needs 4 components")
            dist = tuple(dsl.parse(str(t), names, coords) for t in data["dist"])
        domain = tuple(parse_constraint(c, names, coords) for c in data.get("domain", ()))
        pdom = tuple(parse_constraint(c, names, coords) for c in data.get("param_domain", ()))
    except QCHError as exc:
        if isinstance(exc, ChartError):
            raise
        raise ChartError(f"chart {data.get('name', '?')!r}: {exc}") from exc

    box = None
    if data.get("box") is not None:
        box = tuple((float(lo), float(hi)) for lo, hi in data["box"])
        if len(box) != 4 or any(lo > hi for lo, hi in box):
            raise ChartError("box must be four [lo, hi] pairs")
    return ChartSpec(
        name=str(data.get("name", "chart")),
        coords=coords,
        params=params,
        domain=domain,
        metric=metric,
        omega=omega,
        J=J,
        Jbar=Jbar,
        theta=theta,
        dist=dist,
        param_domain=pdom,
        box=box,
        source=dict(data),
    )


def load_chart(path: str | Path, overrides: Mapping[str, float] | None = None) -> ChartSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ChartError(f"{path}: invalid JSON ({exc})") from exc
    return chart_from_dict(data, overrides)


def validate_chart(spec: ChartSpec, points: Sequence[Sequence[float]]) -> list[Diagnostic]:
    """Domain-constraint and positive-definiteness diagnostics at ``points``.

    Symmetry of the metric is enforced when the chart is built.
    """
    out: list[Diagnostic] = []
    for raw in points:
        point = tuple(float(x) for x in raw)
        bad = spec.contains(point)
        for c in bad:
            out.append(Diagnostic("domain", f"constraint {c.text!r} violated", point))
        if bad:
            continue
        try:
            g = spec.metric_value(point)
        except DomainError as exc:
            out.append(Diagnostic("evaluation", str(exc), point))
            continue
        minors = [np.linalg.det(g[:k, :k]) for k in range(1, 5)]
        if not all(m > 0 for m in minors):
            out.append(Diagnostic("not_positive_definite", f"leading minors {minors}", point))
    return out
