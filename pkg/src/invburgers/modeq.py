"""Formal finite-difference stencils and their differential approximations.

A :class:`Stencil` is a polynomial in shifted values ``u(x + p h, t + q tau)``
with :class:`~invburgers.diffalg.DiffPoly` coefficients and a per-term divisor
``h**i tau**j``. Taylor-expanding every shifted value, eliminating time
derivatives with the Burgers relation and truncating in ``(h, tau)`` gives the
modified equation of the scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Dict, Mapping, Optional, Tuple

import mpmath
import numpy as np

from . import diffalg as da
from .diffalg import H, TAU, T, X, DiffPoly, Sym, U
from .symmetry import burgers_polynomial, invariant_relation, default_viscosity

Shift = Tuple[Fraction, Fraction]
Factors = Tuple[Tuple[Shift, int], ...]
# key: (factors, h divisor power, tau divisor power)
Key = Tuple[Factors, int, int]


class ConsistencyError(ValueError):
    def __init__(self, defect: DiffPoly):
        super().__init__(f"stencil is not consistent with Burgers; defect = {defect}")
        self.defect = defect


def _merge(f1: Factors, f2: Factors) -> Factors:
    out = dict(f1)
    for s, e in f2:
        out[s] = out.get(s, 0) + e
    return tuple(sorted(out.items()))


class Stencil:
    """Immutable sum of ``coeff * prod u(x+p h, t+q tau)**k / (h**i tau**j)`` terms."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Key, DiffPoly]] = None):
        self._terms: Dict[Key, DiffPoly] = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def value(cls, p=0, q=0) -> "Stencil":
        return cls({((((Fraction(p), Fraction(q)), 1),), 0, 0): DiffPoly.const(1)})

    @classmethod
    def coeff(cls, c) -> "Stencil":
        return cls({((), 0, 0): da._coerce(c)})

    @property
    def terms(self) -> Dict[Key, DiffPoly]:
        return dict(self._terms)

    def __add__(self, other) -> "Stencil":
        other = _as_stencil(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, DiffPoly()) + v
        return Stencil(out)

    __radd__ = __add__

    def __neg__(self) -> "Stencil":
        return Stencil({k: -v for k, v in self._terms.items()})

    def __sub__(self, other) -> "Stencil":
        return self + (-_as_stencil(other))

    def __rsub__(self, other) -> "Stencil":
        return _as_stencil(other) - self

    def __mul__(self, other) -> "Stencil":
        other = _as_stencil(other)
        out: Dict[Key, DiffPoly] = {}
        for (f1, i1, j1), c1 in self._terms.items():
            for (f2, i2, j2), c2 in other._terms.items():
                k = (_merge(f1, f2), i1 + i2, j1 + j2)
                out[k] = out.get(k, DiffPoly()) + c1 * c2
        return Stencil(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Stencil":
        out = Stencil.coeff(1)
        for _ in range(k):
            out = out * self
        return out

    def over(self, h_power: int = 0, tau_power: int = 0) -> "Stencil":
        """Divide by ``h**h_power * tau**tau_power``."""
        return Stencil({(f, i + h_power, j + tau_power): c for (f, i, j), c in self._terms.items()})

    def shift_x(self, alpha) -> "Stencil":
        """``E**alpha``: move every factor by ``alpha`` cells; ``x`` in coefficients follows."""
        alpha = Fraction(alpha)
        move = {X: da.x + da.h * alpha}
        out: Dict[Key, DiffPoly] = {}
        for (f, i, j), c in self._terms.items():
            nf = tuple(sorted(((p + alpha, q), e) for (p, q), e in f))
            k = (nf, i, j)
            out[k] = out.get(k, DiffPoly()) + da.substitute(c, move)
        return Stencil(out)

    def shifts(self):
        return sorted({s for (f, _, _) in self._terms for s, _ in f})

    def evaluate(self, field: Callable[[float, float], float], values: Mapping[Sym, float],
                 coerce=float) -> float:
        """Numeric value with ``field(x, t)`` supplying ``u`` and ``values`` the base symbols.

        Terms are summed in expanded form, so wide nonlinear stencils lose digits as
        ``h`` shrinks; pass mpmath values and ``coerce`` for extended precision.
        """
        xv, tv, hv, tauv = values[X], values[T], values[H], values[TAU]
        cache: Dict[Shift, float] = {}
        total = 0.0
        for (f, i, j), c in self._terms.items():
            prod = da.evaluate(c, values, coerce)
            for (p, q), e in f:
                if (p, q) not in cache:
                    cache[(p, q)] = field(xv + coerce(p) * hv, tv + coerce(q) * tauv)
                prod = prod * cache[(p, q)] ** e
            total = total + prod / (hv ** i * tauv ** j)
        return total


def _as_stencil(v) -> Stencil:
    if isinstance(v, Stencil):
        return v
    return Stencil.coeff(v)


# -- Hildebrand operators (undivided) ------------------------------------------------

def E(s: Stencil, alpha) -> Stencil:
    return s.shift_x(alpha)


def delta(s: Stencil) -> Stencil:
    half = Fraction(1, 2)
    return E(s, half) - E(s, -half)


def mu(s: Stencil) -> Stencil:
    half = Fraction(1, 2)
    return (E(s, half) + E(s, -half)) * Fraction(1, 2)


def delta_plus(s: Stencil) -> Stencil:
    return E(s, 1) - s


def delta_minus(s: Stencil) -> Stencil:
    return s - E(s, -1)


def delta_n(s: Stencil, n: int) -> Stencil:
    for _ in range(n):
        s = delta(s)
    return s


def half_value(s: Stencil, side: int) -> Stencil:
    """Value at ``i + side/2`` as the average of the two neighbouring nodes."""
    return (s + E(s, side)) * Fraction(1, 2)


# -- Taylor expansion --------------------------------------------------------------

def _series(shift: Shift, K: int) -> DiffPoly:
    p, q = shift
    terms = {}
    for a in range(K + 1):
        for b in range(K + 1 - a):
            c = (p ** a) * (q ** b) / (factorial(a) * factorial(b))
            if c:
                mono = []
                if a:
                    mono.append((H, a))
                if b:
                    mono.append((TAU, b))
                mono.append((U(a, b), 1))
                terms[tuple(sorted(mono))] = c
    return DiffPoly(terms)


def _trunc_mul(a: DiffPoly, b: DiffPoly, weights, limit) -> DiffPoly:
    prod = a * b
    return prod if limit is None else da.truncate_grid_order(prod, weights, limit)


def taylor_expand(st: Stencil, K: int,
                  weights: Optional[Mapping[Sym, int]] = None,
                  max_order: Optional[int] = None) -> DiffPoly:
    """Replace each ``u(x+p h, t+q tau)`` by its Taylor polynomial (``a + b <= K``) and divide out.

    With ``weights``/``max_order`` given, products are truncated on the fly; the result
    then holds every monomial of weighted order ``<= max_order``.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    series_cache: Dict[Shift, DiffPoly] = {}
    w = dict(weights or {})
    numerators: Dict[Tuple[int, int], DiffPoly] = {}
    for (factors, i, j), coeff in st.terms.items():
        limit = None
        if max_order is not None:
            limit = max_order + i * w.get(H, 0) + j * w.get(TAU, 0)
        acc = coeff if limit is None else da.truncate_grid_order(coeff, w, limit)
        for shift, e in factors:
            if shift not in series_cache:
                series_cache[shift] = _series(shift, K)
            for _ in range(e):
                acc = _trunc_mul(acc, series_cache[shift], w, limit)
        numerators[(i, j)] = numerators.get((i, j), DiffPoly()) + acc
    total = DiffPoly()
    for (i, j), num in sorted(numerators.items()):
        total = total + da.divide_grid(num, i, j)
    if max_order is not None:
        total = da.truncate_grid_order(total, w, max_order)
    return total


# -- scheme catalog -----------------------------------------------------------------

@dataclass(frozen=True)
class SchemeCatalogEntry:
    """A stencil plus the weighted ``(h, tau)`` order its modified equation is kept to."""

    name: str
    stencil: Stencil
    weights: Tuple[int, int]  # (weight of h, weight of tau)
    max_order: int
    viscosity: Optional[DiffPoly] = None

    @property
    def weight_map(self) -> Dict[Sym, int]:
        return {H: self.weights[0], TAU: self.weights[1]}


def _un(q=0) -> Stencil:
    return Stencil.value(0, q)


def _flux(s: Stencil) -> Stencil:
    return s * s * Fraction(1, 2)


def ftcs_stencil() -> Stencil:
    u0, u1 = _un(0), _un(1)
    return ((u1 - u0).over(tau_power=1)
            + mu(delta(_flux(u0))).over(h_power=1)
            - da.nu * delta_n(u0, 2).over(h_power=2))


def _nu_corrections(u0: Stencil) -> Stencil:
    """``nu tau/2 (u u_xx)_x + nu tau/2 (u^2/2)_xxx - nu^2 tau/2 u_xxxx`` discretised."""
    nu, tau = da.nu, da.tau
    m = mu(delta_n(u0, 2))
    up, um = half_value(u0, 1), half_value(u0, -1)
    uux = (up * E(m, Fraction(1, 2)) - um * E(m, Fraction(-1, 2))).over(h_power=3)
    return (nu * tau * Fraction(1, 2) * uux
            - nu * nu * tau * Fraction(1, 2) * delta_n(u0, 4).over(h_power=4)
            + nu * tau * Fraction(1, 2) * mu(delta_n(_flux(u0), 3)).over(h_power=3))


def lax_wendroff_stencil() -> Stencil:
    u0 = _un(0)
    f = _flux(u0)
    up, um = half_value(u0, 1), half_value(u0, -1)
    A = (-da.tau * Fraction(1, 2) * (up * delta_plus(f) - um * delta_minus(f)).over(h_power=2)
         + _nu_corrections(u0))
    return ftcs_stencil() + A


def crank_nicolson_stencil() -> Stencil:
    u0, u1 = _un(0), _un(1)
    half = Fraction(1, 2)
    return ((u1 - u0).over(tau_power=1)
            + half * mu(delta(_flux(u1) + _flux(u0))).over(h_power=1)
            - half * da.nu * delta_n(u1 + u0, 2).over(h_power=2))


def invariant_stencil(C: Optional[DiffPoly] = None) -> Stencil:
    """Fourth-order fluxes, the ``Omega`` flux and the ``nu tau`` corrections.

    ``C`` is a polynomial in ``x, t, u, u_x`` (and constants); it is evaluated at the
    half point ``x + h/2`` with averaged ``u`` and ``u_x = (u_{i+1} - u_i)/h``.
    """
    u0, u1 = _un(0), _un(1)
    f = _flux(u0)
    sixth, twelfth = Fraction(1, 6), Fraction(1, 12)
    core = ((u1 - u0).over(tau_power=1)
            + (mu(delta(f)) - sixth * mu(delta_n(f, 3))).over(h_power=1)
            - da.nu * (delta_n(u0, 2) - twelfth * delta_n(u0, 4)).over(h_power=2))
    up = half_value(u0, 1)
    omega_h2 = da.tau * Fraction(1, 2) * up * up
    if C is not None and C:
        omega_h2 = omega_h2 - _half_point_poly(C, u0)
    flux = omega_h2 * delta_plus(u0)
    omega_term = delta_minus(flux).over(h_power=2)
    return core - omega_term + _nu_corrections(u0)


def _half_point_poly(C: DiffPoly, u0: Stencil) -> Stencil:
    allowed = {X, T, da.NU, U(0, 0), U(1, 0)}
    extra = C.symbols() - allowed
    if extra:
        raise ValueError(f"C may only depend on x, t, nu, u, u_x; got {sorted(map(str, extra))}")
    up = half_value(u0, 1)
    upx = delta_plus(u0).over(h_power=1)
    xh = da.x + da.h * Fraction(1, 2)
    out = Stencil()
    for m, c in C.items():
        term = Stencil.coeff(c)
        for s, e in m:
            if s == X:
                term = term * Stencil.coeff(xh ** e)
            elif s == U(0, 0):
                term = term * up ** e
            elif s == U(1, 0):
                term = term * upx ** e
            else:
                term = term * Stencil.coeff(DiffPoly.sym(s, e))
        out = out + term
    return out


def catalog(name: str, C: Optional[DiffPoly] = None) -> SchemeCatalogEntry:
    if name == "ftcs":
        return SchemeCatalogEntry(name, ftcs_stencil(), (1, 2), 2)
    if name == "lax_wendroff":
        return SchemeCatalogEntry(name, lax_wendroff_stencil(), (1, 1), 2)
    if name == "crank_nicolson":
        return SchemeCatalogEntry(name, crank_nicolson_stencil(), (1, 1), 2)
    if name == "high_order":
        return SchemeCatalogEntry(name, invariant_stencil(None), (1, 2), 3)
    if name == "invariant":
        C = default_viscosity() if C is None else C
        return SchemeCatalogEntry(name, invariant_stencil(C), (1, 1), 1, C)
    raise KeyError(f"unknown scheme {name!r}")


CATALOG_NAMES = ("ftcs", "lax_wendroff", "crank_nicolson", "high_order", "invariant")


def default_depth(entry: SchemeCatalogEntry, weights=None, max_order=None) -> int:
    """Taylor depth that cannot lose a kept term: kept order plus the largest divisor weight."""
    wh, wt = weights or entry.weights
    order = entry.max_order if max_order is None else max_order
    widest = max((i * wh + j * wt for (_, i, j) in entry.stencil.terms), default=0)
    return max(order + widest, 2)


def differential_approximation(entry: SchemeCatalogEntry,
                               weights: Optional[Tuple[int, int]] = None,
                               max_order: Optional[int] = None) -> DiffPoly:
    """Modified equation of ``entry``: order-zero part kept, higher parts time-eliminated."""
    wts = weights or entry.weights
    order = entry.max_order if max_order is None else max_order
    wmap = {H: wts[0], TAU: wts[1]}
    raw = taylor_expand(entry.stencil, default_depth(entry, wts, order), wmap, order)
    lead = da.truncate_grid_order(raw, wmap, 0)
    target = consistency_target(entry)
    if lead != target:
        raise ConsistencyError(lead - target)
    return lead + da.eliminate_time(raw - lead)


def consistency_target(entry: SchemeCatalogEntry) -> DiffPoly:
    """``F`` itself, or ``F + (C u_x)_x`` when the entry carries an O(1) viscosity coefficient."""
    if entry.viscosity is not None and entry.viscosity:
        return invariant_relation(entry.viscosity)
    return burgers_polynomial()


# -- closed-form representations from the g-sequence ----------------------------

def closed_form_representation(name: str, C: Optional[DiffPoly] = None) -> DiffPoly:
    """Hand-entered modified equations, written with the ``g1, g2, g3`` building blocks."""
    x_ = lambda p, n=1: da.dx(p, n)  # noqa: E731
    u, nu, h, tau = da.u(), da.nu, da.h, da.tau
    g1 = -x_(u * u / 2) + nu * x_(u, 2)
    g2 = x_(-g1 * u) + nu * x_(g1, 2)
    g3 = x_(-g2 * u - g1 * g1) + nu * x_(g2, 2)
    base = da.u(0, 1) + x_(u * u) / 2 - nu * x_(u, 2)
    space = h * h / 12 * x_(u * u, 3) - nu * h * h / 12 * x_(u, 4)
    if name == "ftcs":
        return base + tau / 2 * g2 + space
    if name == "lax_wendroff":
        return base + tau * tau / 6 * g3 + space
    if name == "crank_nicolson":
        block = g3 / 6 + x_(g1 * g1 + u * g2) / 4 - nu / 4 * x_(g2, 2)
        return base + tau * tau * block + space
    if name == "high_order":
        return base
    if name == "invariant":
        C = default_viscosity() if C is None else C
        return base + x_(C * da.u(1))
    raise KeyError(f"no closed-form representation for {name!r}")


# -- numerical cross-check -----------------------------------------------------------------

def _mp_rational(c: Fraction):
    return mpmath.mpf(c.numerator) / c.denominator


def numerical_consistency_check(entry: SchemeCatalogEntry, test_field, h: float, tau: float,
                                x0: float = 5.0, t0: float = 1.0,
                                approximation: Optional[DiffPoly] = None,
                                dps: Optional[int] = None) -> float:
    """``|stencil(test_field) - differential_approximation(test_field)|`` at ``(x0, t0)``.

    ``test_field`` must be an exact Burgers solution exposing ``nu``, ``formula(x, t)``
    and ``jet(x, t, order)`` (see :mod:`invburgers.problems`); then the time
    elimination used by the modified equation is exact on it, and the defect is the
    first neglected order of the expansion. ``dps`` switches the stencil evaluation
    to mpmath with that many digits.
    """
    P = differential_approximation(entry) if approximation is None else approximation
    order = max(P.max_derivative_order(), 1)
    jet = test_field.jet(np.array([x0]), np.array([t0]), order)
    derivs = {s: float(jet.derivative(s.a, s.b)[0]) for s in P.u_symbols()}
    base = {X: x0, T: t0, H: h, TAU: tau, da.NU: test_field.nu}
    model = da.evaluate(P, {**base, **derivs})
    if dps is None:
        def field(x, t):
            return float(test_field.value(np.array([x]), t)[0])

        return abs(entry.stencil.evaluate(field, base) - model)
    with mpmath.workdps(dps):
        mp_base = {s: mpmath.mpf(v) for s, v in base.items()}
        value = entry.stencil.evaluate(test_field.formula, mp_base, _mp_rational)
        return abs(float(value) - model)
