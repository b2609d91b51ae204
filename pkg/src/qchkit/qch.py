"""QCH model curvature tensors, Gray conditions and the Weyl block decomposition.

Everything here is pointwise algebra.  The usual input is the adapted frame
(``g = identity``, ``J = STANDARD_J``) but the formulas are written for a
general basis with Gram matrix ``g``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebra
from .algebra import AdaptedFrame, STANDARD_J

# nodes t^2 for the holomorphic-curvature samples in fit_qch
FIT_NODES = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class StructureTensors:
    h: np.ndarray
    m: np.ndarray
    omega1: np.ndarray  # h_J, the Kähler form restricted to D
    omega2: np.ndarray  # m_J
    omega: np.ndarray
    omega_prime: np.ndarray  # omega1 - omega2
    p_D: np.ndarray
    p_E: np.ndarray


@dataclass(frozen=True)
class QCHCoeffs:
    a: float
    b: float
    c: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class CurvatureScalars:
    lam: float  # Ricci eigenvalue on E
    mu: float  # Ricci eigenvalue on D
    tau: float
    kappa: float  # conformal scalar curvature of the opposite structure
    delta: float  # Ric_0 = delta (h - m)


@dataclass(frozen=True)
class ModelTensors:
    Pi: np.ndarray
    Phi: np.ndarray
    Psi: np.ndarray
    K: np.ndarray


@dataclass(frozen=True)
class WeylBlocks:
    kappa_over_6: float
    w2: np.ndarray  # shape (2,)
    w3: np.ndarray  # shape (2, 2), trace free
    w_plus: np.ndarray  # 3x3 self-dual Weyl operator for the chosen structure
    w_minus: np.ndarray  # curvature-type tensor of the Λ⁻ Weyl part (J orientation)
    degenerate: bool

    @property
    def kappa(self) -> float:
        return 6.0 * self.kappa_over_6


def structure_tensors(frame: AdaptedFrame, g=None, J=None) -> StructureTensors:
    g = algebra.check_metric(frame.metric if g is None else g)
    J = STANDARD_J if J is None else np.asarray(J, dtype=float)
    e = frame.vectors
    p_D = np.outer(e[:, 0], g @ e[:, 0]) + np.outer(e[:, 1], g @ e[:, 1])
    p_E = np.eye(4) - p_D
    h = g @ p_D
    m = g @ p_E
    omega = J.T @ g
    omega1 = J.T @ h
    omega2 = J.T @ m
    return StructureTensors(h, m, omega1, omega2, omega, omega1 - omega2, p_D, p_E)


def kahler_kn(h: np.ndarray, g: np.ndarray, J: np.ndarray) -> np.ndarray:
    """The Φ-type Kähler curvature tensor built from a J-invariant symmetric form ``h``."""
    w = J.T @ g
    hj = J.T @ h
    e = np.einsum
    return (
        e("yz,xu->xyzu", g, h)
        - e("xz,yu->xyzu", g, h)
        + e("xu,yz->xyzu", g, h)
        - e("yu,xz->xyzu", g, h)
        + e("yz,xu->xyzu", w, hj)
        - e("xz,yu->xyzu", w, hj)
        + e("xu,yz->xyzu", w, hj)
        - e("yu,xz->xyzu", w, hj)
        - 2 * e("xy,zu->xyzu", w, hj)
        - 2 * e("zu,xy->xyzu", w, hj)
    ) / 8.0


def model_tensor(kind: str, g, J, S: StructureTensors) -> np.ndarray:
    """One of ``Pi``, ``Phi``, ``Psi``, ``K`` for the distribution encoded in ``S``."""
    g = algebra.check_metric(g)
    J = np.asarray(J, dtype=float)
    if kind == "Pi":
        w = J.T @ g
        e = np.einsum
        return (
            e("yz,xu->xyzu", g, g)
            - e("xz,yu->xyzu", g, g)
            + e("yz,xu->xyzu", w, w)
            - e("xz,yu->xyzu", w, w)
            - 2 * e("xy,zu->xyzu", w, w)
        ) / 4.0
    if kind == "Phi":
        return kahler_kn(S.h, g, J)
    if kind == "Psi":
        return -np.einsum("xy,zu->xyzu", S.omega1, S.omega1)
    if kind == "K":
        return model_tensor("Pi", g, J, S) / 6.0 - model_tensor("Phi", g, J, S) + model_tensor("Psi", g, J, S)
    raise ValueError(f"unknown model tensor {kind!r}")


def model_tensors(g, J, S: StructureTensors) -> ModelTensors:
    Pi, Phi, Psi = (model_tensor(k, g, J, S) for k in ("Pi", "Phi", "Psi"))
    return ModelTensors(Pi, Phi, Psi, Pi / 6.0 - Phi + Psi)


def standard_models() -> tuple[AdaptedFrame, StructureTensors, ModelTensors]:
    """Models on the standard frame (D = span{e1, e2})."""
    frame = algebra.make_adapted_frame(np.eye(4), STANDARD_J, np.eye(4)[0])
    S = structure_tensors(frame)
    return frame, S, model_tensors(np.eye(4), STANDARD_J, S)


def qch_curvature(coeffs, models: ModelTensors) -> np.ndarray:
    a, b, c = _abc(coeffs)
    return a * models.Pi + b * models.Phi + c * models.Psi


def eq26_curvature(tau: float, delta: float, kappa: float, models: ModelTensors) -> np.ndarray:
    """QCH tensor with prescribed scalar curvature, Ric_0 = delta (h - m), and kappa."""
    return qch_curvature(eq26_coeffs(tau, delta, kappa), models)


def eq26_coeffs(tau: float, delta: float, kappa: float) -> QCHCoeffs:
    return QCHCoeffs(tau / 6.0 - delta + kappa / 12.0, 2.0 * delta - kappa / 2.0, kappa / 2.0)


def hsc(R: np.ndarray, J, X, g=None) -> float:
    """Holomorphic sectional curvature ``R(X, JX, JX, X) / |X|^4``."""
    g = algebra.check_metric(g)
    X = np.asarray(X, dtype=float)
    n2 = float(X @ g @ X)
    if n2 < 1e-26:
        raise algebra.ZeroVector("hsc of the zero vector")
    JX = np.asarray(J, dtype=float) @ X
    return float(np.einsum("xyzu,x,y,z,u->", R, X, JX, JX, X)) / n2**2


def fit_qch(R: np.ndarray, g, J, frame: AdaptedFrame) -> tuple[QCHCoeffs, float]:
    """Recover (a, b, c) from holomorphic curvatures and report the misfit.

    Samples ``X(t) = t e1 + sqrt(1 - t^2) e3`` at ``t^2 in {0, 1/2, 1}``; the
    residual is the sup-norm of ``R - (a Pi + b Phi + c Psi)`` in the frame.
    """
    g = algebra.check_metric(g)
    J = np.asarray(J, dtype=float)
    e1, e3 = frame.e(0), frame.e(2)
    vals = [hsc(R, J, np.sqrt(s) * e1 + np.sqrt(1.0 - s) * e3, g) for s in FIT_NODES]
    V = np.array([[1.0, s, s * s] for s in FIT_NODES])
    a, b, c = np.linalg.solve(V, vals)
    S = structure_tensors(frame, g, J)
    models = model_tensors(g, J, S)
    coeffs = QCHCoeffs(float(a), float(b), float(c))
    diff = frame.components(R - qch_curvature(coeffs, models))
    return coeffs, float(np.abs(diff).max())


def opposite_structure(J, S: StructureTensors) -> np.ndarray:
    """``Jbar = J (p_E - p_D)``: equals -J on D and J on E."""
    return np.asarray(J, dtype=float) @ (S.p_E - S.p_D)


def gray_residual(R: np.ndarray, Jbar, order: int) -> float:
    """Sup-norm defect of the first (order 1) or second (order 2) Gray identity.

    Components are taken in an orthonormal frame where ``Jbar`` acts by the
    given matrix (columns are images).
    """
    I = np.asarray(Jbar, dtype=float)
    RII = np.einsum("ax,by,abzw->xyzw", I, I, R)
    if order == 1:
        return float(np.abs(RII - R).max())
    if order == 2:
        RIxIz = np.einsum("ax,cz,aycw->xyzw", I, I, R)
        RIxIw = np.einsum("ax,dw,ayzd->xyzw", I, I, R)
        return float(np.abs(R - RII - RIxIz - RIxIw).max())
    raise ValueError("Gray condition order must be 1 or 2")


def swap_to_E(coeffs) -> QCHCoeffs:
    """Coefficients of the same tensor with E as the distinguished distribution."""
    a, b, c = _abc(coeffs)
    return QCHCoeffs(a + b + c, -(b + 2 * c), c)


def ricci_scalars(coeffs) -> CurvatureScalars:
    a, b, c = _abc(coeffs)
    lam = 1.5 * a + 0.25 * b
    mu = 1.5 * a + 1.25 * b + c
    return CurvatureScalars(lam, mu, 2.0 * (lam + mu), 2.0 * c, 0.5 * (mu - lam))


def _abc(coeffs) -> tuple[float, float, float]:
    if isinstance(coeffs, QCHCoeffs):
        return coeffs.as_tuple()
    a, b, c = coeffs
    return float(a), float(b), float(c)


# ----------------------------------------------------------------------
# Weyl decomposition


def weyl_blocks(R: np.ndarray, g=None, J=None, S: StructureTensors | None = None, structure: str = "J",
                cluster_tol: float = 1e-9) -> WeylBlocks:
    """Decompose ``R`` and read off the W⁺ blocks of ``J`` or of ``Jbar``.

    ``R``, ``g``, ``J`` and ``S`` must share one basis.  W⁺ is the self-dual
    Weyl part for the orientation of the requested structure, written in an
    orthonormal basis ``(Ω̂, φ1, φ2)`` of Λ⁺ with Ω̂ its normalised fundamental
    form; ``w_minus`` is always the Λ⁻ Weyl part for the J orientation.
    """
    g = algebra.check_metric(g)
    J = STANDARD_J if J is None else np.asarray(J, dtype=float)
    E = algebra.orthonormal_basis(g)
    Rf = algebra.to_basis(R, E)
    if structure == "J":
        Omega = J.T @ g
    elif structure == "Jbar":
        if S is None:
            raise ValueError("the opposite structure needs StructureTensors")
        Omega = -S.omega_prime
    else:
        raise ValueError(f"structure must be 'J' or 'Jbar', got {structure!r}")
    Of = algebra.to_basis(Omega, E)
    Jf = algebra.to_basis(J.T @ g, E)
    j_orient = 1 if algebra.pfaffian(Jf) > 0 else -1
    s_orient = 1 if algebra.pfaffian(Of) > 0 else -1

    tau = algebra.scalar_curvature(Rf)
    lam = algebra.lambda_operator(Rf, orientation=j_orient)
    Q = lam.matrix
    Pm = lam.minus_projector
    weyl_minus = Pm @ Q @ Pm - (tau / 12.0) * Pm
    w_minus = algebra.operator_to_tensor(weyl_minus)

    P = 0.5 * (np.eye(6) + algebra.hodge_star(s_orient))
    weyl_plus = P @ Q @ P - (tau / 12.0) * P

    basis = _self_dual_basis(Of, P)
    Wp = basis @ weyl_plus @ basis.T
    kappa_over_6 = float(Wp[0, 0])
    w2 = Wp[0, 1:].copy()
    w3 = Wp[1:, 1:] + (kappa_over_6 / 2.0) * np.eye(2)

    eig = np.linalg.eigvalsh(Wp)
    scale = max(float(np.abs(eig).max()), 1e-300)
    distinct = 1 + int(np.sum(np.diff(np.sort(eig)) > cluster_tol * scale))
    return WeylBlocks(kappa_over_6, w2, w3, Wp, w_minus, distinct <= 2)


def _self_dual_basis(Omega: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Rows: orthonormal basis of range(P) starting with the unit vector along Ω."""
    w = algebra.two_form_vector(Omega)
    w = P @ w
    rows = [w / np.linalg.norm(w)]
    for k in range(6):
        v = P @ np.eye(6)[k]
        for r in rows:
            v = v - (r @ v) * r
        n = np.linalg.norm(v)
        if n > 1e-8:
            rows.append(v / n)
        if len(rows) == 3:
            break
    return np.array(rows)


def conformal_scalar_curvature(R, g=None, J=None, S=None, structure="Jbar") -> float:
    return weyl_blocks(R, g, J, S, structure).kappa
