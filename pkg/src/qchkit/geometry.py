"""Chart-level differential geometry driven by exact jets.

Index conventions (coordinate basis):

* ``gamma[k, i, j] = Γ^k_ij``
* ``riemann[i, j, k, l] = g(R(∂_i, ∂_j) ∂_k, ∂_l)`` with
  ``R(X, Y) = [∇_X, ∇_Y] - ∇_[X,Y]``; the unit round sphere has
  ``R(X, Y, Y, X) = +1`` for orthonormal X, Y.
* endomorphisms ``J[a, b] = J^a_b`` (columns are images of basis vectors),
  fundamental forms ``Ω(X, Y) = g(JX, Y)``.

Pointwise curvature algebra happens in the adapted frame, see
:class:`GeometryAtPoint`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import algebra, qch
from .chart import ChartSpec
from .errors import ChartError, DegenerateMetric, DomainError, IncompatiblePair, SingularWedgeMap
from .jets import Jet

#: Lee-form normalization under which the foliation identity holds (see foliation_residual).
FOLIATION_THETA_SCALE = -0.5

TRIPLES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


def _coefficient_tensors():
    # (dω)_abc = ∂_a ω_bc + ∂_b ω_ca + ∂_c ω_ab, with P[b, c, a] = ∂_a ω_bc
    D = np.zeros((4, 4, 4, 4))
    # (θ∧ω)_abc = θ_a ω_bc + θ_b ω_ca + θ_c ω_ab
    W = np.zeros((4, 4, 4, 4))
    for t, (a, b, c) in enumerate(TRIPLES):
        for (p, q, r) in ((a, b, c), (b, c, a), (c, a, b)):
            D[t, q, r, p] += 1.0
            W[t, p, q, r] += 1.0
    return D, W


_D3, _W3 = _coefficient_tensors()


@dataclass(frozen=True)
class ConnectionCoeffs:
    gamma: np.ndarray

    def metric_compatibility(self, g: np.ndarray, dg: np.ndarray) -> float:
        """Sup of ``∇_k g_ij`` given ``dg[i, j, k] = ∂_k g_ij``."""
        G = self.gamma
        nab = dg - np.einsum("lki,lj->ijk", G, g) - np.einsum("lkj,il->ijk", G, g)
        return float(np.abs(nab).max())


@dataclass(frozen=True)
class LeeData:
    theta: np.ndarray
    norm2: float
    codifferential: float
    solve_residual: float
    source: str  # "solved" | "analytic"
    theta_solved: np.ndarray | None = None


@dataclass(frozen=True)
class FoliationResult:
    lhs: float
    residual_a: float  # reading Jθ(ζ) as θ(Jζ)
    residual_b: float  # reading Jθ(ζ) as -θ(Jζ)

    @property
    def best(self) -> float:
        return min(self.residual_a, self.residual_b)


@dataclass
class GeometryAtPoint:
    spec: ChartSpec
    point: tuple[float, ...]
    order: int
    metric: np.ndarray
    metric_jet: Jet
    inverse_jet: Jet
    gamma_jet: Jet
    riemann: np.ndarray
    ricci: np.ndarray
    tau: float
    J_jet: Jet | None = None
    Jbar_jet: Jet | None = None
    p_D_jet: Jet | None = None
    frame: algebra.AdaptedFrame | None = None
    riemann_frame: np.ndarray | None = None
    J_frame: np.ndarray | None = None
    Jbar_frame: np.ndarray | None = None
    structure: qch.StructureTensors | None = None
    models: qch.ModelTensors | None = None

    @property
    def gamma(self) -> np.ndarray:
        return self.gamma_jet.v

    @property
    def J(self) -> np.ndarray | None:
        return None if self.J_jet is None else self.J_jet.v

    @property
    def Jbar(self) -> np.ndarray | None:
        return None if self.Jbar_jet is None else self.Jbar_jet.v

    def require_frame(self):
        if self.frame is None:
            raise ChartError(f"chart {self.spec.name!r} needs a complex structure and 'dist' for frame checks")


# ----------------------------------------------------------------------
# connection and curvature


def _metric_jets(spec: ChartSpec, point, order):
    if not 2 <= order <= 3:
        raise ValueError("curvature needs jets of order 2 or 3")
    bad = spec.contains(point)
    if bad:
        raise DomainError(f"point {tuple(point)} violates {', '.join(c.text for c in bad)}")
    g = spec.metric_jet(point, order)
    algebra.check_metric(g.v)
    return g, g.inv()


def _gamma_jet(g: Jet, gi: Jet) -> Jet:
    """``Γ^k_ij = 1/2 g^kl (∂_i g_jl + ∂_j g_il - ∂_l g_ij)`` as a jet of one order lower."""
    dg = g.partial()  # dg[a, b, i] = ∂_i g_ab
    lowered = dg.transpose((2, 0, 1)) + dg.transpose((0, 2, 1)) - dg  # indexed [i, j, l]
    return Jet.einsum("kl,ijl->kij", gi.truncate(dg.order), lowered) * 0.5


def christoffel(spec: ChartSpec, point: Sequence[float]) -> ConnectionCoeffs:
    g, gi = _metric_jets(spec, point, 2)
    return ConnectionCoeffs(_gamma_jet(g, gi).v)


def _riemann_from_gamma(gamma: Jet, g: np.ndarray) -> np.ndarray:
    G = gamma.v
    dG = gamma.d1  # dG[m, j, k, i] = ∂_i Γ^m_jk
    up = (
        np.einsum("mjki->mijk", dG)
        - np.einsum("mikj->mijk", dG)
        + np.einsum("ljk,mil->mijk", G, G)
        - np.einsum("lik,mjl->mijk", G, G)
    )
    return np.einsum("lm,mijk->ijkl", g, up)


def complex_structure_from(g, Omega, tol: float = 1e-8) -> np.ndarray:
    """``J^a_b = g^{ac} Ω_bc`` so that ``Ω(X, Y) = g(JX, Y)``."""
    g = algebra.check_metric(g)
    Omega = np.asarray(Omega, dtype=float)
    J = np.linalg.solve(g, Omega.T)
    defect = float(np.abs(J @ J + np.eye(4)).max())
    if not np.isfinite(defect) or defect > tol:
        raise IncompatiblePair(f"|J^2 + Id| = {defect:.3e} for the given metric and 2-form")
    return J


def _J_jet(spec: ChartSpec, point, order, gi: Jet) -> Jet | None:
    J = spec.J_jet(point, order)
    if J is not None:
        return J
    Om = spec.omega_jet(point, order)
    if Om is None:
        return None
    return Jet.einsum("ac,bc->ab", gi, Om)


def riemann_at(spec: ChartSpec, point: Sequence[float], order: int = 2) -> GeometryAtPoint:
    """Connection, curvature and (when available) the adapted frame at ``point``."""
    point = tuple(float(x) for x in point)
    g, gi = _metric_jets(spec, point, order)
    gamma = _gamma_jet(g, gi)
    R = _riemann_from_gamma(gamma, g.v)
    ric = algebra.ricci_contraction(R, g.v)
    tau = float(np.einsum("ij,ij->", gi.v, ric))
    geo = GeometryAtPoint(spec, point, order, g.v, g, gi, gamma, R, ric, tau)

    J = _J_jet(spec, point, order, gi)
    if J is None:
        return geo
    defect = float(np.abs(J.v @ J.v + np.eye(4)).max())
    if defect > 1e-8:
        raise IncompatiblePair(f"|J^2 + Id| = {defect:.3e} at {point}")
    geo.J_jet = J
    d = spec.dist_jet(point, order)
    if d is None:
        return geo

    # p_D = (d ⊗ d♭ + Jd ⊗ (Jd)♭) / |d|^2, as a jet so that Jbar can be differentiated
    Jd = Jet.einsum("ab,b->a", J, d)
    gd = Jet.einsum("ab,b->a", g, d)
    gJd = Jet.einsum("ab,b->a", g, Jd)
    n2 = Jet.einsum("a,a->", d, gd)
    if float(n2.v) < 1e-26:
        raise algebra.ZeroVector(f"distribution vector vanishes at {point}")
    pD = (Jet.einsum("a,b->ab", d, gd) + Jet.einsum("a,b->ab", Jd, gJd)) / n2
    geo.p_D_jet = pD
    Jbar = spec.Jbar_jet(point, order)
    if Jbar is None:
        Jbar = J - 2.0 * (J @ pD)
    geo.Jbar_jet = Jbar

    frame = algebra.make_adapted_frame(g.v, J.v, d.v)
    geo.frame = frame
    geo.riemann_frame = frame.components(R)
    geo.J_frame = frame.endomorphism(J.v)
    geo.Jbar_frame = frame.endomorphism(Jbar.v)
    S = qch.structure_tensors(algebra.make_adapted_frame(np.eye(4), algebra.STANDARD_J, np.eye(4)[0]))
    geo.structure = S
    geo.models = qch.model_tensors(np.eye(4), algebra.STANDARD_J, S)
    return geo


def curvature_symmetry(geo: GeometryAtPoint) -> float:
    return max(algebra.symmetry_residuals(geo.riemann).values())


def metric_compatibility(geo: GeometryAtPoint) -> float:
    return ConnectionCoeffs(geo.gamma).metric_compatibility(geo.metric, geo.metric_jet.d1)


# ----------------------------------------------------------------------
# Kähler and Hermitian checks


def _covariant_derivative_endo(A: Jet, gamma: np.ndarray) -> np.ndarray:
    """``N[i, a, b] = (∇_i A)^a_b``."""
    dA = A.d1  # dA[a, b, i]
    return (
        np.einsum("abi->iab", dA)
        + np.einsum("aic,cb->iab", gamma, A.v)
        - np.einsum("cib,ac->iab", gamma, A.v)
    )


def _endo_norm(N: np.ndarray, g: np.ndarray) -> float:
    gi = np.linalg.inv(g)
    val = np.einsum("ip,ac,bq,iab,pcq->", gi, g, gi, N, N)
    return float(np.sqrt(max(val, 0.0)))


def kahler_residual(geo: GeometryAtPoint, J: Jet | None = None) -> float:
    """Pointwise norm of ``∇J``."""
    J = geo.J_jet if J is None else J
    if J is None:
        raise ChartError(f"chart {geo.spec.name!r} provides neither J nor omega")
    return _endo_norm(_covariant_derivative_endo(J, geo.gamma), geo.metric)


def complex_structure_residual(geo: GeometryAtPoint) -> float:
    J = geo.J
    if J is None:
        raise ChartError(f"chart {geo.spec.name!r} provides neither J nor omega")
    skew = geo.metric @ J
    return max(float(np.abs(J @ J + np.eye(4)).max()), float(np.abs(skew + skew.T).max()))


def nijenhuis_residual(geo: GeometryAtPoint) -> float:
    """Norm of the Nijenhuis tensor of the opposite structure (0 iff Hermitian)."""
    geo.require_frame()
    I = geo.Jbar_jet
    A, dA = I.v, I.d1  # dA[k, j, l] = ∂_l I^k_j
    N = (
        np.einsum("li,kjl->kij", A, dA)
        - np.einsum("lj,kil->kij", A, dA)
        - np.einsum("kl,lji->kij", A, dA)
        + np.einsum("kl,lij->kij", A, dA)
    )
    gi = np.linalg.inv(geo.metric)
    val = np.einsum("kc,ip,jq,kij,cpq->", geo.metric, gi, gi, N, N)
    return float(np.sqrt(max(val, 0.0)))


# ----------------------------------------------------------------------
# curvature-operator residuals in the adapted frame


def frame_qch(geo: GeometryAtPoint) -> tuple[qch.QCHCoeffs, float]:
    geo.require_frame()
    std = algebra.make_adapted_frame(np.eye(4), algebra.STANDARD_J, np.eye(4)[0])
    return qch.fit_qch(geo.riemann_frame, np.eye(4), algebra.STANDARD_J, std)


def weyl_at(geo: GeometryAtPoint, structure: str = "Jbar") -> qch.WeylBlocks:
    geo.require_frame()
    return qch.weyl_blocks(geo.riemann_frame, None, algebra.STANDARD_J, geo.structure, structure)


def semisym_residual(geo: GeometryAtPoint) -> float:
    return algebra.dot_norm(geo.riemann, geo.riemann, geo.metric)


def rweyl_residual(geo: GeometryAtPoint) -> float:
    geo.require_frame()
    return algebra.dot_norm(geo.riemann_frame, weyl_at(geo).w_minus)


# ----------------------------------------------------------------------
# Lee form, Gauduchon identity, foliation identity


def _fundamental_form(geo: GeometryAtPoint, which: str) -> Jet:
    if which == "J":
        if geo.J_jet is None:
            raise ChartError(f"chart {geo.spec.name!r} provides neither J nor omega")
        A = geo.J_jet
    elif which == "Jbar":
        geo.require_frame()
        A = geo.Jbar_jet
    else:
        raise ValueError("which must be 'J' or 'Jbar'")
    return Jet.einsum("ca,cb->ab", A, geo.metric_jet)


def _solve_theta(omega: Jet) -> tuple[Jet, float]:
    rhs = Jet.einsum("tqrp,qrp->t", _D3, omega.partial())
    M = Jet.einsum("tkqr,qr->tk", _W3, omega.truncate(omega.order - 1))
    cond = np.linalg.cond(M.v)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularWedgeMap(f"wedge with the fundamental form is singular (cond {cond:.2e})")
    theta = Jet.einsum("kt,t->k", M.inv(), rhs)
    residual = float(np.abs(M.v @ theta.v - rhs.v).max())
    return theta, residual


def _codifferential(theta: Jet, gi: np.ndarray, gamma: np.ndarray) -> float:
    dth = theta.d1  # dth[j, i] = ∂_i θ_j
    nab = dth.T - np.einsum("kij,k->ij", gamma, theta.v)  # (∇_i θ)_j
    return float(-np.einsum("ij,ij->", gi, nab))


def lee_form_at(geo: GeometryAtPoint, which: str = "Jbar", analytic: bool = True) -> LeeData:
    """Lee form θ with ``dΩ = θ ∧ Ω`` of the requested structure.

    ``δθ = -g^ij (∇_i θ)_j`` uses the chart's analytic θ when present (and
    ``analytic`` is set), else the jet of the solved θ field.
    """
    omega = _fundamental_form(geo, which)
    theta, residual = _solve_theta(omega)
    gi = geo.inverse_jet.v
    source = "solved"
    th = theta
    if analytic and which == "Jbar" and geo.spec.theta is not None:
        th = geo.spec.theta_jet(geo.point, geo.order)
        source = "analytic"
    norm2 = float(th.v @ gi @ th.v)
    return LeeData(th.v.copy(), norm2, _codifferential(th, gi, geo.gamma), residual, source, theta.v.copy())


def gauduchon_residual(geo: GeometryAtPoint, lee: LeeData) -> float:
    """``|κ - τ + 3/2 (|θ|^2 + 2 δθ)|`` for the opposite structure."""
    kappa = weyl_at(geo, "Jbar").kappa
    return abs(kappa - geo.tau + 1.5 * (lee.norm2 + 2.0 * lee.codifferential))


def foliation_residual(
    geo: GeometryAtPoint, zeta, X, Y, lee: LeeData | None = None, theta_scale: float = FOLIATION_THETA_SCALE
) -> FoliationResult:
    """Defect of ``2 g(∇_X ζ, Y) = -Jθ(ζ) ω(X, Y) - θ(ζ) g(X, Y)`` for ζ in D, X, Y in E.

    ζ is extended to the D-valued field ``p_D ζ``; both readings of ``Jθ(ζ)``
    are reported.  The identity is written for ``theta_scale`` times the Lee
    form of :func:`lee_form_at`; the default ``-1/2`` is the normalization
    ``θ = d log|c|`` restricted to D, which is the one that makes it hold.
    """
    geo.require_frame()
    lee = lee_form_at(geo, "Jbar") if lee is None else lee
    zeta, X, Y = (np.asarray(v, dtype=float) for v in (zeta, X, Y))
    field = Jet.einsum("ab,b->a", geo.p_D_jet, zeta)
    dz = field.d1  # dz[k, i] = ∂_i ζ^k
    nabla = np.einsum("i,ki->k", X, dz) + np.einsum("kij,i,j->k", geo.gamma, X, field.v)
    g = geo.metric
    lhs = 2.0 * float(nabla @ g @ Y)
    th = theta_scale * lee.theta
    th_Jz = float(th @ (geo.J @ zeta))
    th_z = float(th @ zeta)
    om = float((geo.J @ X) @ g @ Y)
    gxy = float(X @ g @ Y)
    ra = abs(lhs - (-th_Jz * om - th_z * gxy))
    rb = abs(lhs - (th_Jz * om - th_z * gxy))
    return FoliationResult(lhs, ra, rb)


def foliation_sweep(
    geo: GeometryAtPoint, lee: LeeData | None = None, theta_scale: float = FOLIATION_THETA_SCALE
) -> FoliationResult:
    """Worst defects over ζ ∈ {e1, e2} and X, Y ∈ {e3, e4}."""
    geo.require_frame()
    lee = lee_form_at(geo, "Jbar") if lee is None else lee
    fr = geo.frame
    ra = rb = 0.0
    lhs = 0.0
    for z in (0, 1):
        for x in (2, 3):
            for y in (2, 3):
                r = foliation_residual(geo, fr.e(z), fr.e(x), fr.e(y), lee, theta_scale)
                ra, rb = max(ra, r.residual_a), max(rb, r.residual_b)
                lhs = max(lhs, abs(r.lhs))
    return FoliationResult(lhs, ra, rb)


__all__ = [
    "FOLIATION_THETA_SCALE",
    "ConnectionCoeffs",
    "DegenerateMetric",
    "FoliationResult",
    "GeometryAtPoint",
    "LeeData",
    "christoffel",
    "complex_structure_from",
    "complex_structure_residual",
    "curvature_symmetry",
    "foliation_residual",
    "foliation_sweep",
    "frame_qch",
    "gauduchon_residual",
    "kahler_residual",
    "lee_form_at",
    "metric_compatibility",
    "nijenhuis_residual",
    "riemann_at",
    "rweyl_residual",
    "semisym_residual",
    "weyl_at",
]
