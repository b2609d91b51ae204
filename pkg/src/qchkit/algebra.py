"""Pointwise multilinear algebra on a 4-dimensional Euclidean tangent space.

Tensors are plain ``numpy`` arrays of covariant components with respect to
some basis whose Gram matrix is ``g`` (the identity when omitted, i.e. an
orthonormal frame).  Rank-4 "curvature-type" tensors are indexed
``T[x, y, z, u] = T(e_x, e_y, e_z, e_u)``.

Conventions
-----------
* A curvature tensor acts on tensors as a derivation with a minus sign:
  ``(A(e_i, e_j) . T)(Z1, ..., Zk) = -sum_s T(Z1, .., A_ij Z_s, .., Zk)``
  where ``g(A_ij Z, W) = A(e_i, e_j, Z, W)``.
* 2-forms carry the inner product ``<a, b> = 1/2 sum a_ij b_ij``; the Kähler
  form of a Hermitian structure has squared norm 2.
* The operator on 2-forms induced by ``T`` is ``Q(a, b) = -1/4 sum T_ijkl
  a_ij b_kl``, so a unit round sphere gives the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateMetric, ZeroVector

DIM = 4
EYE = np.eye(DIM)

#: Standard complex structure: J e1 = e2, J e3 = e4 (columns are images).
STANDARD_J = np.array(
    [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
)

#: Index pairs (i < j) labelling the 2-form basis e^i ^ e^j.
PAIRS = tuple(combinations(range(DIM), 2))


def _metric(g):
    return EYE if g is None else np.asarray(g, dtype=float)


def check_metric(g) -> np.ndarray:
    """Return ``g`` as an array, raising :class:`DegenerateMetric` unless it is SPD."""
    g = _metric(g)
    if g.shape != (DIM, DIM) or not np.all(np.isfinite(g)):
        raise DegenerateMetric(f"metric must be a finite 4x4 array, got shape {g.shape}")
    if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise DegenerateMetric("metric is not symmetric")
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise DegenerateMetric("metric is not positive definite") from None
    return g


def orthonormal_basis(g) -> np.ndarray:
    """Columns form a g-orthonormal basis with the orientation of the coordinate basis."""
    g = check_metric(g)
    L = np.linalg.cholesky(g)
    return np.linalg.inv(L).T


def to_basis(T: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Covariant components of ``T`` in the basis whose vectors are the columns of ``E``."""
    out = np.asarray(T, dtype=float)
    for axis in range(out.ndim):
        out = np.moveaxis(np.tensordot(out, E, axes=([axis], [0])), -1, axis)
    return out


def endomorphism_to_basis(A: np.ndarray, E: np.ndarray) -> np.ndarray:
    return np.linalg.solve(E, A @ E)


@dataclass(frozen=True)
class AdaptedFrame:
    """Orthonormal basis with e1, e2 = J e1 spanning D and e3, e4 = J e3 spanning E.

    ``vectors[:, k]`` holds the components of frame vector k in the original basis.
    """

    vectors: np.ndarray
    metric: np.ndarray

    def e(self, k: int) -> np.ndarray:
        return self.vectors[:, k]

    def components(self, T: np.ndarray) -> np.ndarray:
        return to_basis(T, self.vectors)

    def endomorphism(self, A: np.ndarray) -> np.ndarray:
        return endomorphism_to_basis(A, self.vectors)

    def vector(self, X: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.vectors, X)


def make_adapted_frame(g, J, d, e3_hint=None) -> AdaptedFrame:
    """Adapted orthonormal frame with ``D = span{d, Jd}``.

    ``e3_hint`` fixes the vector projected off D to obtain e3; by default the
    coordinate vector with the largest component normal to D is used.
    """
    g = check_metric(g)
    J = np.asarray(J, dtype=float)
    d = np.asarray(d, dtype=float)

    def norm(v):
        return float(np.sqrt(v @ g @ v))

    nd = norm(d)
    if nd < 1e-13:
        raise ZeroVector("distribution vector vanishes")
    e1 = d / nd
    e2 = J @ e1

    def off_d(v):
        return v - (e1 @ g @ v) * e1 - (e2 @ g @ v) * e2

    if e3_hint is not None:
        w = off_d(np.asarray(e3_hint, dtype=float))
        if norm(w) < 1e-13:
            raise ZeroVector("e3_hint lies in D")
    else:
        candidates = [off_d(EYE[k]) for k in range(DIM)]
        w = max(candidates, key=norm)
    e3 = w / norm(w)
    e4 = J @ e3
    return AdaptedFrame(np.column_stack([e1, e2, e3, e4]), g)


# ----------------------------------------------------------------------
# curvature operators


def bianchi(T: np.ndarray) -> np.ndarray:
    """Cyclic symmetrisation in the first three slots."""
    return (T + np.transpose(T, (1, 2, 0, 3)) + np.transpose(T, (2, 0, 1, 3))) / 3.0


def ricci_contraction(T: np.ndarray, g=None) -> np.ndarray:
    """``c(T)(Y, Z) = sum_i T(e_i, Y, Z, e_i)`` over a g-orthonormal frame."""
    gi = np.linalg.inv(check_metric(g))
    return np.einsum("il,iyzl->yz", gi, T)


def scalar_curvature(T: np.ndarray, g=None) -> float:
    gi = np.linalg.inv(check_metric(g))
    return float(np.einsum("yz,yz->", gi, ricci_contraction(T, g)))


def symmetry_residuals(T: np.ndarray) -> dict[str, float]:
    """Sup-norm defects of the algebraic curvature identities."""
    return {
        "antisym_12": float(np.abs(T + np.transpose(T, (1, 0, 2, 3))).max()),
        "antisym_34": float(np.abs(T + np.transpose(T, (0, 1, 3, 2))).max()),
        "pair": float(np.abs(T - np.transpose(T, (2, 3, 0, 1))).max()),
        "bianchi": float(np.abs(bianchi(T)).max()),
    }


def act(A: np.ndarray, T: np.ndarray, g=None) -> np.ndarray:
    """All derivation actions ``A(e_i, e_j) . T`` stacked as ``out[i, j, ...]``."""
    gi = np.linalg.inv(check_metric(g))
    ops = np.einsum("ijzv,vw->ijzw", A, gi)  # ops[i, j, z, w] = (A_ij)^w_z
    T = np.asarray(T, dtype=float)
    out = np.zeros((DIM, DIM) + T.shape)
    for slot in range(T.ndim):
        # move the acted-on slot of T to the front, contract with the operator
        moved = np.moveaxis(T, slot, 0)
        term = np.tensordot(ops, moved, axes=([3], [0]))  # i, j, z_slot, rest...
        out -= np.moveaxis(term, 2, 2 + slot)
    return out


def derivation_act(A: np.ndarray, i: int, j: int, T: np.ndarray, g=None) -> np.ndarray:
    """``A(e_i, e_j) . T`` for basis indices ``i != j`` (0-based)."""
    return act(A, T, g)[i, j]


def dot_norm(A: np.ndarray, B: np.ndarray, g=None) -> float:
    """Sup over frame pairs and components of ``|A(e_i, e_j) . B|`` (0 iff ``A . B = 0``)."""
    if g is not None:
        E = orthonormal_basis(g)
        A, B = to_basis(A, E), to_basis(B, E)
    return float(np.abs(act(A, B)).max())


# ----------------------------------------------------------------------
# 2-forms


def two_form_vector(a: np.ndarray) -> np.ndarray:
    """Coordinates of an antisymmetric 4x4 array in the orthonormal basis ``e^i ^ e^j``."""
    return np.array([a[i, j] for i, j in PAIRS])


def two_form_array(v: np.ndarray) -> np.ndarray:
    a = np.zeros((DIM, DIM))
    for k, (i, j) in enumerate(PAIRS):
        a[i, j] = v[k]
        a[j, i] = -v[k]
    return a


def hodge_star(orientation: int = 1) -> np.ndarray:
    """Hodge star on 2-forms of an orthonormal frame, as a 6x6 matrix."""
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    star = np.zeros((6, 6))
    for a, (i, j) in enumerate(PAIRS):
        k, l = [m for m in range(DIM) if m not in (i, j)]
        sign = _perm_sign((i, j, k, l))
        star[PAIRS.index((k, l)), a] = sign * orientation
    return star


def _perm_sign(p) -> int:
    p = list(p)
    sign = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def pfaffian(a: np.ndarray) -> float:
    """``a ^ a = 2 pf(a) e^1234`` for a 2-form in four dimensions."""
    return float(a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2])


@dataclass(frozen=True)
class LambdaOperator:
    """Symmetric operator on 2-forms, in the orthonormal basis ``e^i ^ e^j`` (i < j)."""

    matrix: np.ndarray
    star: np.ndarray
    orientation: int

    @property
    def plus_projector(self) -> np.ndarray:
        return 0.5 * (np.eye(6) + self.star)

    @property
    def minus_projector(self) -> np.ndarray:
        return 0.5 * (np.eye(6) - self.star)

    def plus_part(self) -> np.ndarray:
        P = self.plus_projector
        return P @ self.matrix @ P

    def minus_part(self) -> np.ndarray:
        P = self.minus_projector
        return P @ self.matrix @ P

    def form(self, a: np.ndarray, b: np.ndarray) -> float:
        """``<Q a, b>`` for antisymmetric 4x4 arrays in the same frame."""
        return float(two_form_vector(a) @ self.matrix @ two_form_vector(b))


def tensor_to_operator(T: np.ndarray) -> np.ndarray:
    Q = np.empty((6, 6))
    for a, (i, j) in enumerate(PAIRS):
        for b, (k, l) in enumerate(PAIRS):
            Q[a, b] = -T[i, j, k, l]
    return Q


def operator_to_tensor(Q: np.ndarray) -> np.ndarray:
    """Inverse of :func:`tensor_to_operator` on curvature-type tensors."""
    T = np.zeros((DIM,) * 4)
    for a, (i, j) in enumerate(PAIRS):
        for b, (k, l) in enumerate(PAIRS):
            v = -Q[a, b]
            T[i, j, k, l] = v
            T[j, i, k, l] = -v
            T[i, j, l, k] = -v
            T[j, i, l, k] = v
    return T


def lambda_operator(T: np.ndarray, g=None, orientation: int = 1) -> LambdaOperator:
    """Operator induced by ``T`` on 2-forms.

    For a non-identity ``g`` the components are first moved to the
    orthonormal basis from :func:`orthonormal_basis`, which keeps the
    orientation of the given basis; ``orientation=+1`` means that orientation.
    """
    if g is not None:
        T = to_basis(T, orthonormal_basis(g))
    Q = tensor_to_operator(T)
    return LambdaOperator(0.5 * (Q + Q.T), hodge_star(orientation), orientation)
