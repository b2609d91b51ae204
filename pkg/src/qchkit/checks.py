"""Named pointwise checks grouped into suites.

Every check maps a :class:`~qchkit.geometry.GeometryAtPoint` to a
non-negative residual.  A check *passes* at a point when the residual is
below its tolerance; fixtures may expect a check to fail instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import geometry, qch
from .errors import ChartError

SUITES = ("algebra", "kahler", "qch", "gray1", "gray2", "semisym", "weyl", "lee", "gauduchon", "foliation")


@dataclass
class PointContext:
    """Lazily computed quantities shared by the checks at one point."""

    geo: geometry.GeometryAtPoint
    expected_coeffs: tuple[float, float, float] | None = None
    _cache: dict = field(default_factory=dict)

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def fit(self) -> tuple[qch.QCHCoeffs, float]:
        return self._get("fit", lambda: geometry.frame_qch(self.geo))

    @property
    def weyl_jbar(self) -> qch.WeylBlocks:
        return self._get("weyl_jbar", lambda: geometry.weyl_at(self.geo, "Jbar"))

    @property
    def weyl_j(self) -> qch.WeylBlocks:
        return self._get("weyl_j", lambda: geometry.weyl_at(self.geo, "J"))

    @property
    def lee(self) -> geometry.LeeData:
        return self._get("lee", lambda: geometry.lee_form_at(self.geo, "Jbar"))

    @property
    def foliation(self) -> geometry.FoliationResult:
        return self._get("foliation", lambda: geometry.foliation_sweep(self.geo, self.lee))


@dataclass(frozen=True)
class Check:
    name: str
    suite: str
    tol: float
    fn: Callable[[PointContext], float]
    #: measurements (e.g. a norm that is zero only on special inputs) are only
    #: compared when a fixture states an expectation for them
    informational: bool = False
    needs: str = ""  # "coeffs" | "theta" | "" (availability precondition)


def _sup(x) -> float:
    return float(np.abs(np.asarray(x)).max())


def _weyl_minus_cK(ctx: PointContext) -> float:
    c = ctx.fit[0].c
    return _sup(ctx.weyl_jbar.w_minus - c * ctx.geo.models.K)


def _lee_analytic(ctx: PointContext) -> float:
    lee = ctx.lee
    return _sup(lee.theta - lee.theta_solved)


def _coeffs(ctx: PointContext) -> float:
    return _sup(np.array(ctx.fit[0].as_tuple()) - np.array(ctx.expected_coeffs))


_CHECKS = (
    Check("curvature_symmetry", "algebra", 1e-9, lambda c: geometry.curvature_symmetry(c.geo)),
    Check("metric_compatibility", "algebra", 1e-11, lambda c: geometry.metric_compatibility(c.geo)),
    Check("riemann_norm", "algebra", 1e-12, lambda c: _sup(c.geo.riemann), informational=True),
    Check("complex_structure", "kahler", 1e-10, lambda c: geometry.complex_structure_residual(c.geo)),
    Check("kahler", "kahler", 1e-9, lambda c: geometry.kahler_residual(c.geo)),
    Check("qch_fit", "qch", 1e-7, lambda c: c.fit[1]),
    Check("two_a_plus_b", "qch", 1e-7, lambda c: abs(2 * c.fit[0].a + c.fit[0].b)),
    Check("tau_kappa", "qch", 1e-7, lambda c: abs(c.geo.tau - c.weyl_jbar.kappa)),
    Check("coeffs", "qch", 1e-6, _coeffs, needs="coeffs"),
    Check("gray1", "gray1", 1e-7, lambda c: qch.gray_residual(c.geo.riemann_frame, c.geo.Jbar_frame, 1)),
    Check("gray2", "gray2", 1e-7, lambda c: qch.gray_residual(c.geo.riemann_frame, c.geo.Jbar_frame, 2)),
    Check("semisym", "semisym", 1e-8, lambda c: geometry.semisym_residual(c.geo)),
    Check("kappa_J_tau", "weyl", 1e-8, lambda c: abs(c.weyl_j.kappa - c.geo.tau)),
    Check("w2w3_jbar", "weyl", 1e-8, lambda c: max(_sup(c.weyl_jbar.w2), _sup(c.weyl_jbar.w3))),
    Check("weyl_minus_cK", "weyl", 1e-8, _weyl_minus_cK),
    Check("rweyl", "weyl", 1e-8, lambda c: geometry.rweyl_residual(c.geo)),
    Check("w_minus_norm", "weyl", 1e-8, lambda c: _sup(c.weyl_jbar.w_minus), informational=True),
    Check("lee_solve", "lee", 1e-9, lambda c: c.lee.solve_residual),
    Check("lee_norm", "lee", 1e-9, lambda c: float(np.sqrt(c.lee.norm2)), informational=True),
    Check("lee_analytic", "lee", 1e-9, _lee_analytic, needs="theta"),
    Check("jbar_integrable", "lee", 1e-8, lambda c: geometry.nijenhuis_residual(c.geo)),
    Check("gauduchon", "gauduchon", 1e-7, lambda c: geometry.gauduchon_residual(c.geo, c.lee)),
    Check("foliation_a", "foliation", 1e-7, lambda c: c.foliation.residual_a, informational=True),
    Check("foliation_b", "foliation", 1e-7, lambda c: c.foliation.residual_b, informational=True),
    Check("foliation", "foliation", 1e-7, lambda c: c.foliation.best),
)

CHECKS: Mapping[str, Check] = {c.name: c for c in _CHECKS}


def checks_for(suites: Sequence[str], has_coeffs: bool = False, has_theta: bool = False) -> list[Check]:
    """Checks of the given suites, in registry order, whose preconditions hold."""
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise ChartError(f"unknown suite(s) {unknown}; known: {', '.join(SUITES)}")
    avail = {"": True, "coeffs": has_coeffs, "theta": has_theta}
    return [c for c in _CHECKS if c.suite in suites and avail[c.needs]]


def needs_order3(suites: Sequence[str], has_theta: bool) -> bool:
    """The codifferential of a solved θ needs third derivatives of the metric."""
    return not has_theta and any(s in ("lee", "gauduchon") for s in suites)


def point_record(ctx: PointContext) -> dict:
    """Fitted coefficients and derived scalars at a point (empty without a frame)."""
    if ctx.geo.frame is None:
        return {}
    coeffs, _ = ctx.fit
    s = qch.ricci_scalars(coeffs)
    return {
        "a": coeffs.a,
        "b": coeffs.b,
        "c": coeffs.c,
        "lambda": s.lam,
        "mu": s.mu,
        "tau": ctx.geo.tau,
        "kappa": ctx.weyl_jbar.kappa,
    }


__all__ = ["CHECKS", "SUITES", "Check", "PointContext", "checks_for", "needs_order3", "point_record"]
