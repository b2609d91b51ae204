"""Sampled verification runs and their JSON reports."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__, catalog, checks, geometry
from .chart import ChartSpec, load_chart, validate_chart
from .errors import ChartError, QCHError

SCHEMA = "qchkit.report/1"
MAX_REDRAWS = 1000


@dataclass(frozen=True)
class RunConfig:
    fixture: str | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    chart: str | None = None
    suites: tuple[str, ...] = checks.SUITES
    points: int = 10
    seed: int = 0
    box: tuple[tuple[float, float], ...] | None = None
    explicit_points: tuple[tuple[float, ...], ...] = ()
    tol: Mapping[str, float] = field(default_factory=dict)
    order: int = 2
    workers: int = 1

    def validate(self) -> None:
        if (self.fixture is None) == (self.chart is None):
            raise ChartError("give exactly one of a fixture name or a chart file")
        if self.points < 1:
            raise ChartError("point count must be at least 1")
        if not self.suites:
            raise ChartError("at least one suite is required")
        if self.order not in (2, 3):
            raise ChartError("jet order must be 2 or 3")
        unknown = [k for k in self.tol if k not in checks.CHECKS]
        if unknown:
            raise ChartError(f"tolerance override for unknown check(s) {unknown}")
        if self.box is not None and (len(self.box) != 4 or any(lo > hi for lo, hi in self.box)):
            raise ChartError("box must be four lo:hi ranges with lo <= hi")


@dataclass(frozen=True)
class _Plan:
    spec: ChartSpec
    fixture: catalog.FixtureDescriptor | None
    checks: tuple[checks.Check, ...]
    order: int
    # check name -> (tolerance, expected verdict or None when informational)
    rules: Mapping[str, tuple[float, str | None]]


def _plan(cfg: RunConfig) -> _Plan:
    cfg.validate()
    fixture = None
    if cfg.fixture is not None:
        fixture = catalog.get(cfg.fixture, cfg.params)
        spec = fixture.spec
    else:
        spec = load_chart(cfg.chart, cfg.params)
    has_theta = spec.theta is not None
    selected = checks.checks_for(
        cfg.suites, has_coeffs=fixture is not None and fixture.expected_coeffs is not None, has_theta=has_theta
    )
    order = 3 if checks.needs_order3(cfg.suites, has_theta) else cfg.order
    rules = {}
    for c in selected:
        tol, verdict = c.tol, (None if c.informational else "pass")
        if fixture is not None:
            exp = fixture.expectation(c.name)
            tol, verdict = (exp.tol, exp.verdict) if exp is not None else (c.tol, None)
        rules[c.name] = (float(cfg.tol.get(c.name, tol)), verdict)
    return _Plan(spec, fixture, tuple(selected), order, rules)


def sample_points(spec: ChartSpec, n: int, seed: int, box=None) -> list[tuple[int, tuple[float, ...]]]:
    """``n`` admissible points as ``(draw index, point)`` in draw order.

    Uniform draws in ``box`` (default: the chart's box); points that violate a
    domain constraint or where the metric is not positive definite are
    redrawn, at most :data:`MAX_REDRAWS` times in total.
    """
    box = np.array(box if box is not None else catalog.sample_box(spec), dtype=float)
    rng = np.random.default_rng(seed)
    out: list[tuple[int, tuple[float, ...]]] = []
    draws = rejected = 0
    while len(out) < n:
        p = tuple(float(x) for x in box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random(4))
        draws += 1
        if validate_chart(spec, [p]):
            rejected += 1
            if rejected > MAX_REDRAWS:
                raise ChartError(f"more than {MAX_REDRAWS} rejected draws; is the box inside the domain?")
            continue
        out.append((draws - 1, p))
    return out


def _evaluate(plan: _Plan, point: tuple[float, ...]) -> dict[str, Any]:
    geo = geometry.riemann_at(plan.spec, point, plan.order)
    ctx = checks.PointContext(geo, plan.fixture.expected_coeffs if plan.fixture else None)
    results = {}
    for c in plan.checks:
        tol, _ = plan.rules[c.name]
        try:
            r = float(c.fn(ctx))
            results[c.name] = {"residual": r, "tol": tol, "pass": bool(r < tol)}
        except ChartError:
            raise
        except QCHError as exc:
            results[c.name] = {"residual": None, "tol": tol, "pass": False, "error": f"{type(exc).__name__}: {exc}"}
    return {"checks": results, "coefficients": checks.point_record(ctx)}


def _summary(plan: _Plan, records: Sequence[dict]) -> tuple[dict, bool]:
    summary = {}
    ok = True
    for c in plan.checks:
        tol, expected = plan.rules[c.name]
        rows = [r["checks"][c.name] for r in records]
        passes = sum(1 for r in rows if r["pass"])
        vals = [r["residual"] for r in rows if r["residual"] is not None]
        observed = "pass" if passes == len(rows) else "fail" if passes == 0 else "mixed"
        match = None if expected is None else observed == expected
        if match is False:
            ok = False
        summary[c.name] = {
            "suite": c.suite,
            "tol": tol,
            "expected": expected,
            "observed": observed,
            "pass_count": passes,
            "points": len(rows),
            "worst_residual": max(vals) if vals else None,
            "best_residual": min(vals) if vals else None,
            "match": match,
        }
    return summary, ok


def run(cfg: RunConfig) -> tuple[dict[str, Any], int]:
    """Execute a run; returns the report and the exit code (0 match, 1 mismatch).

    Input problems raise :class:`~qchkit.errors.QCHError` subclasses.
    """
    plan = _plan(cfg)
    if cfg.explicit_points:
        pts = [(k, tuple(float(x) for x in p)) for k, p in enumerate(cfg.explicit_points)]
        for _, p in pts:
            bad = validate_chart_point(plan.spec, p)
            if bad:
                raise ChartError(f"point {p}: {bad}")
    else:
        pts = sample_points(plan.spec, cfg.points, cfg.seed, cfg.box)
    workers = max(1, int(cfg.workers))
    if workers == 1:
        evaluated = [_evaluate(plan, p) for _, p in pts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            evaluated = list(pool.map(lambda dp: _evaluate(plan, dp[1]), pts))
    records = [{"index": i, "draw": d, "coords": list(p), **ev} for i, ((d, p), ev) in enumerate(zip(pts, evaluated))]
    summary, ok = _summary(plan, records)
    report = {
        "schema": SCHEMA,
        "tool": {"name": "qchkit", "version": __version__},
        "config": {
            "source": {"fixture": cfg.fixture, "params": dict(plan.spec.params)}
            if cfg.fixture
            else {"chart": str(cfg.chart), "params": dict(plan.spec.params)},
            "suites": list(cfg.suites),
            "points": len(pts),
            "seed": cfg.seed,
            "box": [list(b) for b in (cfg.box or catalog.sample_box(plan.spec))],
            "explicit_points": bool(cfg.explicit_points),
            "tol_overrides": dict(cfg.tol),
            "order_requested": cfg.order,
            "order": plan.order,
        },
        "points": records,
        "summary": summary,
        "verdict": "pass" if ok else "fail",
    }
    return report, 0 if ok else 1


def validate_chart_point(spec: ChartSpec, point) -> str:
    return "; ".join(d.message for d in validate_chart(spec, [point]))


def dumps(report: Mapping[str, Any]) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"
