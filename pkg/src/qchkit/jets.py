"""Truncated multivariate Taylor jets in four variables.

A :class:`Jet` carries the value of a (possibly array-valued) function at a
point together with all of its partial derivatives up to order 1, 2 or 3.
Derivative axes are always *trailing*: for a jet of base shape ``S``,

    v   : S
    d1  : S + (4,)
    d2  : S + (4, 4)        symmetric in the last two axes
    d3  : S + (4, 4, 4)     fully symmetric in the last three axes

Arithmetic propagates derivatives with the exact Leibniz/Faà di Bruno
expansions, so results are exact up to floating-point rounding.  The lower
slots of an order-3 jet are computed by exactly the same operations as an
order-2 jet, hence agree bitwise.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DomainError

NVAR = 4


class Jet:
    __slots__ = ("order", "v", "d1", "d2", "d3")
    __array_priority__ = 1000  # make ndarray * Jet dispatch to Jet.__rmul__

    def __init__(self, order, v, d1=None, d2=None, d3=None):
        if order not in (0, 1, 2, 3):
            raise ValueError(f"jet order must be 0..3, got {order}")
        self.order = order
        self.v = np.asarray(v, dtype=float)
        shape = self.v.shape
        self.d1 = _slot(d1, shape + (NVAR,)) if order >= 1 else None
        self.d2 = _slot(d2, shape + (NVAR,) * 2) if order >= 2 else None
        self.d3 = _slot(d3, shape + (NVAR,) * 3) if order >= 3 else None

    # ------------------------------------------------------------------
    # construction

    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        return cls(order, value)

    @classmethod
    def variable(cls, index: int, point: Sequence[float], order: int) -> "Jet":
        """The coordinate function ``x_index`` (0-based) at ``point``."""
        d1 = np.zeros(NVAR)
        d1[index] = 1.0
        return cls(order, float(point[index]), d1)

    @classmethod
    def stack(cls, jets: Sequence["Jet"], shape: tuple[int, ...] | None = None) -> "Jet":
        """Stack jets of equal base shape along a new leading axis, optionally reshaped."""
        order = min(j.order for j in jets)
        jets = [j.truncate(order) for j in jets]
        slots = [np.stack([j.slots()[k] for j in jets]) for k in range(order + 1)]
        out = cls(order, *slots)
        if shape is not None:
            out = out.reshape(shape)
        return out

    def slots(self) -> list[np.ndarray]:
        return [self.v, self.d1, self.d2, self.d3][: self.order + 1]

    # ------------------------------------------------------------------
    # shape handling

    @property
    def shape(self) -> tuple[int, ...]:
        return self.v.shape

    @property
    def ndim(self) -> int:
        return self.v.ndim

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        if order == self.order:
            return self
        return Jet(order, *self.slots()[: order + 1])

    def reshape(self, shape: tuple[int, ...]) -> "Jet":
        return Jet(
            self.order,
            *[s.reshape(tuple(shape) + (NVAR,) * k) for k, s in enumerate(self.slots())],
        )

    def transpose(self, axes: Sequence[int]) -> "Jet":
        """Permute base axes; derivative axes stay trailing."""
        n = self.ndim
        return Jet(
            self.order,
            *[s.transpose(tuple(axes) + tuple(range(n, n + k))) for k, s in enumerate(self.slots())],
        )

    @property
    def T(self) -> "Jet":
        return self.transpose(tuple(reversed(range(self.ndim))))

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            raise IndexError("Ellipsis indexing is not supported on jets")
        return Jet(self.order, *[s[idx] for s in self.slots()])

    def partial(self) -> "Jet":
        """Gradient as a jet of one order lower; the new base axis is last."""
        if self.order == 0:
            raise ValueError("order-0 jet has no derivatives")
        return Jet(self.order - 1, *self.slots()[1:])

    def sum(self, axis: int) -> "Jet":
        if axis < 0:
            axis += self.ndim
        return Jet(self.order, *[s.sum(axis=axis) for s in self.slots()])

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, shape={self.shape}, v={self.v!r})"

    # ------------------------------------------------------------------
    # arithmetic

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet(0, other)

    def __add__(self, other):
        other = self._coerce(other)
        order = _common_order(self, other)
        a, b = self._pad(order), other._pad(order)
        return Jet(order, *[x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.order, *[-s for s in self.slots()])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other.order == 0:
            s = other.v
            return Jet(self.order, *[x * _trail(s, k) for k, x in enumerate(self.slots())])
        if self.order == 0:
            return other * self
        return _elementwise_product(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.order == 0:
            if np.any(other.v == 0):
                raise DomainError("division by zero")
            return self * (1.0 / other.v)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, other):
        if isinstance(other, Jet):
            if other.order == 0 or not np.any(other.d1):
                exponent = other.v
                if exponent.ndim == 0:
                    return self.power(float(exponent))
            if np.any(self.v <= 0):
                raise DomainError("variable exponent requires a positive base")
            return (other * self.log()).exp()
        return self.power(float(other))

    def power(self, p: float) -> "Jet":
        """``self**p``: repeated multiplication (by squaring) for integer ``p``, else exp/log."""
        if float(p).is_integer():
            n = int(p)
            out = None
            base = self
            k = abs(n)
            while k:
                if k & 1:
                    out = base if out is None else out * base
                k >>= 1
                if k:
                    base = base * base
            if out is None:
                return Jet(self.order, np.ones_like(self.v))
            return out if n > 0 else out.reciprocal()
        if np.any(self.v <= 0):
            raise DomainError(f"non-integer power {p} of a non-positive base")
        v = self.v
        return self.compose(
            v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2), p * (p - 1) * (p - 2) * v ** (p - 3)
        )

    def _pad(self, order: int) -> list[np.ndarray]:
        slots = self.slots()
        shape = self.shape
        for k in range(len(slots), order + 1):
            slots.append(np.zeros(shape + (NVAR,) * k))
        return slots

    # ------------------------------------------------------------------
    # univariate functions (elementwise)

    def compose(self, f0, f1, f2, f3) -> "Jet":
        """Apply an elementwise function given its value and first three derivatives."""
        o = self.order
        v = np.asarray(f0, dtype=float)
        if o == 0:
            return Jet(0, v)
        u1 = self.d1
        d1 = _trail(f1, 1) * u1
        d2 = d3 = None
        if o >= 2:
            u2 = self.d2
            d2 = _trail(f2, 2) * u1[..., :, None] * u1[..., None, :] + _trail(f1, 2) * u2
        if o >= 3:
            u3 = self.d3
            cross = (
                u2[..., :, :, None] * u1[..., None, None, :]
                + u2[..., :, None, :] * u1[..., None, :, None]
                + u2[..., None, :, :] * u1[..., :, None, None]
            )
            d3 = (
                _trail(f3, 3) * u1[..., :, None, None] * u1[..., None, :, None] * u1[..., None, None, :]
                + _trail(f2, 3) * cross
                + _trail(f1, 3) * u3
            )
        return Jet(o, v, d1, d2, d3)

    def reciprocal(self) -> "Jet":
        v = self.v
        if np.any(v == 0):
            raise DomainError("division by zero")
        r = 1.0 / v
        return self.compose(r, -(r**2), 2 * r**3, -6 * r**4)

    def exp(self) -> "Jet":
        e = np.exp(self.v)
        return self.compose(e, e, e, e)

    def log(self) -> "Jet":
        v = self.v
        if np.any(v <= 0):
            raise DomainError("log of a non-positive value")
        r = 1.0 / v
        return self.compose(np.log(v), r, -(r**2), 2 * r**3)

    def sqrt(self) -> "Jet":
        v = self.v
        if np.any(v <= 0):
            # the derivative blows up at 0, so 0 is excluded as well
            raise DomainError("sqrt of a non-positive value")
        s = np.sqrt(v)
        return self.compose(s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v))

    def sin(self) -> "Jet":
        s, c = np.sin(self.v), np.cos(self.v)
        return self.compose(s, c, -s, -c)

    def cos(self) -> "Jet":
        s, c = np.sin(self.v), np.cos(self.v)
        return self.compose(c, -s, -c, s)

    def tan(self) -> "Jet":
        c = np.cos(self.v)
        if np.any(np.abs(c) < 1e-300):
            raise DomainError("tan evaluated at a pole")
        t = np.tan(self.v)
        sec2 = 1.0 + t * t
        return self.compose(t, sec2, 2 * t * sec2, 2 * sec2 * (1 + 3 * t * t))

    def sinh(self) -> "Jet":
        s, c = np.sinh(self.v), np.cosh(self.v)
        return self.compose(s, c, s, c)

    def cosh(self) -> "Jet":
        s, c = np.sinh(self.v), np.cosh(self.v)
        return self.compose(c, s, c, s)

    # ------------------------------------------------------------------
    # linear algebra

    @staticmethod
    def einsum(subscripts: str, a, b) -> "Jet":
        """Bilinear ``np.einsum`` with derivatives (lowercase subscripts only)."""
        lhs, out = subscripts.replace(" ", "").split("->")
        sa, sb = lhs.split(",")
        if not isinstance(a, Jet):
            a = Jet(0, a)
        if not isinstance(b, Jet):
            b = Jet(0, b)
        order = _common_order(a, b)
        A, B = a._pad(order), b._pad(order)

        def term(i, j, da, db, dout):
            return np.einsum(f"{sa}{da},{sb}{db}->{out}{dout}", A[i], B[j])

        v = term(0, 0, "", "", "")
        d1 = d2 = d3 = None
        if order >= 1:
            d1 = term(1, 0, "X", "", "X") + term(0, 1, "", "X", "X")
        if order >= 2:
            d2 = (
                term(2, 0, "XY", "", "XY")
                + term(1, 1, "X", "Y", "XY")
                + term(1, 1, "Y", "X", "XY")
                + term(0, 2, "", "XY", "XY")
            )
        if order >= 3:
            d3 = (
                term(3, 0, "XYZ", "", "XYZ")
                + term(2, 1, "XY", "Z", "XYZ")
                + term(2, 1, "XZ", "Y", "XYZ")
                + term(2, 1, "YZ", "X", "XYZ")
                + term(1, 2, "X", "YZ", "XYZ")
                + term(1, 2, "Y", "XZ", "XYZ")
                + term(1, 2, "Z", "XY", "XYZ")
                + term(0, 3, "", "XYZ", "XYZ")
            )
        return Jet(order, v, d1, d2, d3)

    def __matmul__(self, other):
        return Jet.einsum("ij,jk->ik", self, other)

    def __rmatmul__(self, other):
        return Jet.einsum("ij,jk->ik", other, self)

    def inv(self) -> "Jet":
        """Inverse of a square matrix jet.

        With ``A = A0 + N`` where ``N`` has zero value, ``N`` is nilpotent in
        the truncated algebra and ``A^-1 = sum_k (-A0^-1 N)^k A0^-1``.
        """
        if self.ndim != 2 or self.shape[0] != self.shape[1]:
            raise ValueError("inv() needs a square matrix jet")
        B = np.linalg.inv(self.v)
        if self.order == 0:
            return Jet(0, B)
        N = Jet(self.order, np.zeros_like(self.v), *self.slots()[1:])
        X = -(Jet.einsum("ij,jk->ik", B, N))
        term = Jet(self.order, B)
        out = term
        for _ in range(self.order):
            term = X @ term
            out = out + term
        return out


def _slot(arr, shape):
    if arr is None:
        return np.zeros(shape)
    return np.broadcast_to(np.asarray(arr, dtype=float), shape).copy()


def _trail(arr, k: int):
    """Append ``k`` singleton axes so ``arr`` broadcasts against derivative slots."""
    arr = np.asarray(arr, dtype=float)
    return arr.reshape(arr.shape + (1,) * k)


def _common_order(a: Jet, b: Jet) -> int:
    # constants (order 0) adopt the other operand's order
    if a.order == 0:
        return b.order
    if b.order == 0:
        return a.order
    return min(a.order, b.order)


def _elementwise_product(a: Jet, b: Jet) -> Jet:
    o = min(a.order, b.order)
    a0, b0 = a.v, b.v
    v = a0 * b0
    a1, b1 = a.d1, b.d1
    d1 = a1 * _trail(b0, 1) + _trail(a0, 1) * b1
    d2 = d3 = None
    if o >= 2:
        a2, b2 = a.d2, b.d2
        d2 = (
            a2 * _trail(b0, 2)
            + a1[..., :, None] * b1[..., None, :]
            + a1[..., None, :] * b1[..., :, None]
            + _trail(a0, 2) * b2
        )
    if o >= 3:
        a3, b3 = a.d3, b.d3
        d3 = (
            a3 * _trail(b0, 3)
            + a2[..., :, :, None] * b1[..., None, None, :]
            + a2[..., :, None, :] * b1[..., None, :, None]
            + a2[..., None, :, :] * b1[..., :, None, None]
            + a1[..., :, None, None] * b2[..., None, :, :]
            + a1[..., None, :, None] * b2[..., :, None, :]
            + a1[..., None, None, :] * b2[..., :, :, None]
            + _trail(a0, 3) * b3
        )
    return Jet(o, v, d1, d2, d3)


def symmetric_entries(order: int) -> int:
    """Number of independent partials of the given order in four variables."""
    return math.comb(NVAR + order - 1, order)
