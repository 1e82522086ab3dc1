"""Truncated bivariate Taylor jets for exact-to-roundoff derivatives of closed forms.

``Jet.c[a, b]`` holds ``d^(a+b) f / dx^a dt^b / (a! b!)`` for ``a + b <= order``;
trailing axes are batch dimensions. Order 1 is ordinary forward-mode dual
numbers; higher orders give all mixed derivatives at once.
"""

from __future__ import annotations

from math import factorial

import mpmath
import numpy as np


class Jet:
    __slots__ = ("c", "order")
    __array_priority__ = 100

    def __init__(self, coeffs: np.ndarray, order: int):
        self.c = coeffs
        self.order = order

    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        v = np.asarray(value, dtype=float)
        c = np.zeros((order + 1, order + 1) + v.shape)
        c[0, 0] = v
        return cls(c, order)

    @classmethod
    def variable(cls, value, which: str, order: int) -> "Jet":
        j = cls.constant(value, order)
        if order >= 1:
            j.c[(1, 0) if which == "x" else (0, 1)] = 1.0
        return j

    @property
    def value(self) -> np.ndarray:
        return self.c[0, 0]

    def derivative(self, a: int, b: int = 0) -> np.ndarray:
        if a + b > self.order:
            raise ValueError(f"jet of order {self.order} has no derivative ({a},{b})")
        return self.c[a, b] * (factorial(a) * factorial(b))

    def _mask(self, c: np.ndarray) -> np.ndarray:
        n = self.order
        for a in range(n + 1):
            c[a, n + 1 - a:] = 0.0
        return c

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError("jet orders differ")
            return other
        return Jet.constant(other, self.order)

    # -- arithmetic ---------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.c + self._lift(other).c, self.order)
        c = self.c.copy()
        c[0, 0] = c[0, 0] + other
        return Jet(c, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * np.asarray(other, dtype=float), self.order)
        other = self._lift(other)
        n = self.order
        if n == 0:
            return Jet(self.c * other.c, 0)
        a, b = self.c, other.c
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
        for i in range(n + 1):
            for j in range(n + 1 - i):
                aij = a[i, j]
                if not np.any(aij):
                    continue
                out[i:, j:] += aij * b[: n + 1 - i, : n + 1 - j]
        return Jet(self._mask(out), n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.c / np.asarray(other, dtype=float), self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = Jet.constant(np.ones_like(self.value), self.order)
        for _ in range(k):
            out = out * self
        return out

    # -- composition with scalar functions ------------------------------------------
    def _compose(self, derivs) -> "Jet":
        """``f(c0 + r) = sum_k f^(k)(c0) r^k / k!`` with nilpotent ``r``."""
        r = Jet(self.c.copy(), self.order)
        r.c[0, 0] = 0.0
        out = Jet.constant(derivs[0], self.order)
        power = None
        for k in range(1, self.order + 1):
            power = r if power is None else power * r
            out = out + power * (derivs[k] / factorial(k))
        return out

    def exp(self) -> "Jet":
        e = np.exp(self.value)
        return self._compose([e] * (self.order + 1))

    def log(self) -> "Jet":
        c0 = self.value
        d = [np.log(c0)] + [(-1) ** (k + 1) * factorial(k - 1) / c0 ** k for k in range(1, self.order + 1)]
        return self._compose(d)

    def reciprocal(self) -> "Jet":
        c0 = self.value
        d = [(-1) ** k * factorial(k) / c0 ** (k + 1) for k in range(self.order + 1)]
        return self._compose(d)

    def sqrt(self) -> "Jet":
        c0 = self.value
        d = []
        coef = 1.0
        for k in range(self.order + 1):
            d.append(coef * c0 ** (0.5 - k))
            coef *= 0.5 - k
        return self._compose(d)

    def sin(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [s, c, -s, -c]
        return self._compose([cyc[k % 4] for k in range(self.order + 1)])

    def cos(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [c, -s, -c, s]
        return self._compose([cyc[k % 4] for k in range(self.order + 1)])

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        out = Jet(self.c[: order + 1, : order + 1].copy(), order)
        out._mask(out.c)
        return out

    # -- differentiation -------------------------------------------------------------
    def dx(self) -> "Jet":
        return self._shift(0)

    def dt(self) -> "Jet":
        return self._shift(1)

    def _shift(self, axis: int) -> "Jet":
        n = self.order
        if n == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        c = np.zeros((n, n) + self.c.shape[2:])
        for a in range(n):
            for b in range(n - a):
                if axis == 0:
                    c[a, b] = (a + 1) * self.c[a + 1, b]
                else:
                    c[a, b] = (b + 1) * self.c[a, b + 1]
        return Jet(c, n - 1)


# -- dispatching helpers (jets, numpy values or mpmath scalars) -------------------------

def _dispatch(v, method: str, np_fn, mp_fn):
    if isinstance(v, Jet):
        return getattr(v, method)()
    if isinstance(v, mpmath.mpf):
        return mp_fn(v)
    return np_fn(v)


def exp(v):
    return _dispatch(v, "exp", np.exp, mpmath.exp)


def log(v):
    return _dispatch(v, "log", np.log, mpmath.log)


def sqrt(v):
    return _dispatch(v, "sqrt", np.sqrt, mpmath.sqrt)


def sin(v):
    return _dispatch(v, "sin", np.sin, mpmath.sin)


def cos(v):
    return _dispatch(v, "cos", np.cos, mpmath.cos)


def value_of(v):
    if isinstance(v, Jet):
        return v.value
    if isinstance(v, mpmath.mpf):
        return float(v)
    return np.asarray(v, dtype=float)


def inv_one_plus_exp(z):
    """``1 / (1 + exp(z))`` without overflow; saturates to 0 for large ``z``."""
    if isinstance(z, mpmath.mpf):
        return 1 / (1 + mpmath.exp(z))
    m = np.maximum(value_of(z), 0.0)
    em = np.exp(-m)
    return em / (em + exp(z - m))
