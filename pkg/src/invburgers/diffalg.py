"""Exact differential polynomials in (x, t, nu, h, tau, u and its derivatives).

A :class:`DiffPoly` is a sparse multivariate polynomial with :class:`fractions.Fraction`
coefficients. Derivative coordinates ``u_(a,b)`` (``a`` x-derivatives, ``b``
t-derivatives) are treated as independent symbols, so the usual jet-space
operations are available: formal partials, total derivatives ``D_x``/``D_t``,
and elimination of time derivatives through the Burgers relation
``u_t = -u u_x + nu u_xx``.

Example:
    >>> u, ux = U(0, 0), U(1, 0)
    >>> p = DiffPoly.sym(u) ** 2 / 2
    >>> str(total_derivative(p, "x"))
    'u*u_x'
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Iterable, Iterator, Mapping, NamedTuple, Tuple, Union


class Sym(NamedTuple):
    """Symbol tag. ``rank`` fixes the total order: x < t < nu < h < tau < u_(a,b)."""

    rank: int
    a: int = 0
    b: int = 0

    @property
    def is_u(self) -> bool:
        return self.rank == 5

    @property
    def order(self) -> int:
        return self.a + self.b if self.is_u else 0

    def __str__(self) -> str:
        if self.rank < 5:
            return _BASE_NAMES[self.rank]
        if self.a == 0 and self.b == 0:
            return "u"
        return "u_" + "x" * self.a + "t" * self.b


_BASE_NAMES = ("x", "t", "nu", "h", "tau")

X = Sym(0)
T = Sym(1)
NU = Sym(2)
H = Sym(3)
TAU = Sym(4)


def U(a: int, b: int = 0) -> Sym:
    if a < 0 or b < 0:
        raise ValueError("derivative counts must be non-negative")
    return Sym(5, a, b)


Monomial = Tuple[Tuple[Sym, int], ...]
Scalar = Union[int, Fraction]

_ONE: Monomial = ()


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    out = dict(m1)
    for s, e in m2:
        out[s] = out.get(s, 0) + e
    return tuple(sorted(out.items()))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _sort_key(m: Monomial):
    # graded lexicographic, largest first
    return (-_mono_degree(m), tuple((s, -e) for s, e in m))


class DiffPoly:
    """Immutable canonical polynomial: ``{monomial: Fraction}`` without zeros."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean: Dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = Fraction(c)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Fraction]) -> "DiffPoly":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def const(cls, c: Scalar) -> "DiffPoly":
        return cls({_ONE: c})

    @classmethod
    def sym(cls, s: Sym, power: int = 1) -> "DiffPoly":
        if power < 0:
            raise ValueError("negative power")
        if power == 0:
            return cls.const(1)
        return cls._raw({((s, power),): Fraction(1)})

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def symbols(self) -> set:
        return {s for m in self._terms for s, _ in m}

    def u_symbols(self) -> set:
        return {s for s in self.symbols() if s.is_u}

    def max_derivative_order(self) -> int:
        return max((s.order for s in self.u_symbols()), default=0)

    def coeff(self, monomial: Monomial) -> Fraction:
        return self._terms.get(monomial, Fraction(0))

    def constant_term(self) -> Fraction:
        return self._terms.get(_ONE, Fraction(0))

    def degree_in(self, s: Sym) -> int:
        return max((dict(m).get(s, 0) for m in self._terms), default=0)

    # -- ring operations ----------------------------------------------------
    def __add__(self, other) -> "DiffPoly":
        if not isinstance(other, _COERCIBLE):
            return NotImplemented
        other = _coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return DiffPoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "DiffPoly":
        if not isinstance(other, _COERCIBLE):
            return NotImplemented
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "DiffPoly":
        if not isinstance(other, _COERCIBLE):
            return NotImplemented
        return _coerce(other) - self

    def __mul__(self, other) -> "DiffPoly":
        if isinstance(other, (int, Fraction)):
            if not other:
                return DiffPoly()
            return DiffPoly._raw({m: c * other for m, c in self._terms.items()})
        if not isinstance(other, _COERCIBLE):
            return NotImplemented
        other = _coerce(other)
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                v = out.get(m, 0) + c1 * c2
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return DiffPoly._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "DiffPoly":
        if not isinstance(other, (int, Fraction)):
            raise TypeError("DiffPoly can only be divided by a rational scalar")
        return self * (Fraction(1) / Fraction(other))

    def __pow__(self, k: int) -> "DiffPoly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = DiffPoly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.const(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"DiffPoly({to_text(self)!r})"


_COERCIBLE = (DiffPoly, int, Fraction, Sym)


def _coerce(v) -> DiffPoly:
    if isinstance(v, DiffPoly):
        return v
    if isinstance(v, (int, Fraction)):
        return DiffPoly.const(v)
    if isinstance(v, Sym):
        return DiffPoly.sym(v)
    raise TypeError(f"cannot convert {type(v).__name__} to DiffPoly")


def combine(op: str, a: DiffPoly, b=None) -> DiffPoly:
    """Dispatch form of the ring operations (``add``, ``mul``, ``neg``, ``pow``)."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "pow":
        return a ** b
    raise ValueError(f"unknown op {op!r}")


# -- named constructors ------------------------------------------------------

x = DiffPoly.sym(X)
t = DiffPoly.sym(T)
nu = DiffPoly.sym(NU)
h = DiffPoly.sym(H)
tau = DiffPoly.sym(TAU)


def u(a: int = 0, b: int = 0) -> DiffPoly:
    return DiffPoly.sym(U(a, b))


# -- calculus -----------------------------------------------------------------

def partial(p: DiffPoly, s: Sym) -> DiffPoly:
    """Formal partial derivative, all symbols independent."""
    out: Dict[Monomial, Fraction] = {}
    for m, c in p.items():
        for idx, (sym, e) in enumerate(m):
            if sym != s:
                continue
            if e == 1:
                nm = m[:idx] + m[idx + 1:]
            else:
                nm = m[:idx] + ((sym, e - 1),) + m[idx + 1:]
            out[nm] = out.get(nm, 0) + c * e
            break
    return DiffPoly({k: v for k, v in out.items() if v})


def total_derivative(p: DiffPoly, direction: str) -> DiffPoly:
    """``D_x`` or ``D_t``: explicit partial plus the chain rule through every ``u_(a,b)``."""
    if direction == "x":
        base, step = X, (1, 0)
    elif direction == "t":
        base, step = T, (0, 1)
    else:
        raise ValueError("direction must be 'x' or 't'")
    result = partial(p, base)
    for s in sorted(p.u_symbols()):
        nxt = DiffPoly.sym(U(s.a + step[0], s.b + step[1]))
        result = result + partial(p, s) * nxt
    return result


def dx(p: DiffPoly, n: int = 1) -> DiffPoly:
    for _ in range(n):
        p = total_derivative(p, "x")
    return p


def substitute(p: DiffPoly, mapping: Mapping[Sym, DiffPoly]) -> DiffPoly:
    """Replace each symbol in ``mapping`` by a polynomial."""
    if not mapping:
        return p
    powers: Dict[Tuple[Sym, int], DiffPoly] = {}

    def power(s: Sym, e: int) -> DiffPoly:
        key = (s, e)
        if key not in powers:
            powers[key] = mapping[s] ** e
        return powers[key]

    acc: Dict[Monomial, Fraction] = {}
    for m, c in p.items():
        kept = tuple((s, e) for s, e in m if s not in mapping)
        term = DiffPoly._raw({kept: c})
        for s, e in m:
            if s in mapping:
                term = term * power(s, e)
                if term.is_zero():
                    break
        for mm, cc in term.items():
            v = acc.get(mm, 0) + cc
            if v:
                acc[mm] = v
            else:
                acc.pop(mm, None)
    return DiffPoly._raw(acc)


# -- Burgers time-derivative elimination ------------------------------------------

def burgers_g1() -> DiffPoly:
    """Right-hand side of ``u_t = -(u^2/2)_x + nu u_xx``."""
    return -(u() * u(1)) + nu * u(2)


@lru_cache(maxsize=None)
def _time_block(b: int) -> DiffPoly:
    # eliminated D_t^(b-1) g1, i.e. the x-only form of u_(0,b)
    if b == 1:
        return burgers_g1()
    prev = _time_block(b - 1)
    out = DiffPoly()
    for s in sorted(prev.u_symbols()):
        out = out + partial(prev, s) * _replacement(U(s.a, 1))
    return out


@lru_cache(maxsize=None)
def _replacement(s: Sym) -> DiffPoly:
    if s.b == 0:
        return DiffPoly.sym(s)
    if s.a == 0:
        return _time_block(s.b)
    return total_derivative(_replacement(U(s.a - 1, s.b)), "x")


def eliminate_time(p: DiffPoly) -> DiffPoly:
    """Rewrite every ``u_(a,b)`` with ``b >= 1`` using the Burgers relation and its prolongations."""
    targets = {s: _replacement(s) for s in p.u_symbols() if s.b >= 1}
    return substitute(p, targets)


def g_sequence(n: int) -> list:
    """The x-only forms of ``u_t, u_tt, ...`` (``g1, g2, ...``), each fully expanded."""
    return [_time_block(k) for k in range(1, n + 1)]


# -- grid-order truncation ------------------------------------------------------------

def grid_weight(m: Monomial, weights: Mapping[Sym, int]) -> int:
    return sum(weights.get(s, 0) * e for s, e in m)


def truncate_grid_order(p: DiffPoly, weights: Mapping[Sym, int], max_order: int) -> DiffPoly:
    """Drop monomials whose weighted degree in ``(h, tau)`` exceeds ``max_order``.

    ``weights`` maps ``H`` and ``TAU`` to positive integers; ``{H: 1, TAU: 2}``
    treats ``tau`` like ``h**2``.
    """
    for s, w in weights.items():
        if s not in (H, TAU):
            raise ValueError("only h and tau carry grid weights")
        if w < 1:
            raise ValueError("grid weights must be >= 1")
    return DiffPoly._raw(
        {m: c for m, c in p.items() if grid_weight(m, weights) <= max_order}
    )


def grid_part(p: DiffPoly, h_power: int, tau_power: int) -> DiffPoly:
    """Coefficient of ``h**h_power * tau**tau_power`` (other symbols kept)."""
    out = {}
    for m, c in p.items():
        d = dict(m)
        if d.get(H, 0) == h_power and d.get(TAU, 0) == tau_power:
            out[tuple((s, e) for s, e in m if s not in (H, TAU))] = c
    return DiffPoly(out)


def divide_grid(p: DiffPoly, h_power: int, tau_power: int) -> DiffPoly:
    """Exact division by ``h**h_power * tau**tau_power``; raises if a monomial is not divisible."""
    if h_power == 0 and tau_power == 0:
        return p
    out = {}
    for m, c in p.items():
        d = dict(m)
        if d.get(H, 0) < h_power or d.get(TAU, 0) < tau_power:
            raise ArithmeticError(f"monomial {_mono_text(m)} not divisible by h^{h_power} tau^{tau_power}")
        d[H] = d.get(H, 0) - h_power
        d[TAU] = d.get(TAU, 0) - tau_power
        out[tuple(sorted((s, e) for s, e in d.items() if e))] = c
    return DiffPoly._raw(out)


# -- numeric evaluation -----------------------------------------------------------------

def evaluate(p: DiffPoly, values: Mapping[Sym, float], coerce=float):
    """Evaluate at numeric (or numpy array) values for every symbol present.

    ``coerce`` converts the rational coefficients (e.g. to an mpmath number).
    """
    total = 0.0
    for m, c in p.items():
        term = coerce(c)
        for s, e in m:
            try:
                v = values[s]
            except KeyError:
                raise KeyError(f"no value supplied for {s}") from None
            term = term * v ** e
        total = total + term
    return total


# -- text format -------------------------------------------------------------------

def _mono_text(m: Monomial) -> str:
    return "*".join(str(s) if e == 1 else f"{s}^{e}" for s, e in m)


def _coeff_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def to_text(p: DiffPoly) -> str:
    """Canonical printer: graded-lex order, rationals as ``p/q``, ``0`` for the zero polynomial."""
    if p.is_zero():
        return "0"
    parts = []
    for m in sorted(p._terms, key=_sort_key):
        c = p._terms[m]
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if not m:
            body = _coeff_text(mag)
        elif mag == 1:
            body = _mono_text(m)
        else:
            body = f"{_coeff_text(mag)}*{_mono_text(m)}"
        parts.append((sign, body))
    first_sign, first = parts[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


_NAME_RE = re.compile(r"^(x|t|nu|h|tau|u(?:_[xt]+)?)$")


def parse_sym(name: str) -> Sym:
    m = _NAME_RE.match(name)
    if not m:
        raise ValueError(f"unknown symbol {name!r}")
    if name in _BASE_NAMES:
        return Sym(_BASE_NAMES.index(name))
    if name == "u":
        return U(0, 0)
    ders = name[2:]
    if "x" in ders.lstrip("x"):
        raise ValueError(f"derivative letters must be x's then t's: {name!r}")
    return U(ders.count("x"), ders.count("t"))


_TERM_SPLIT = re.compile(r"\s*([+-])\s*")


def from_text(text: str) -> DiffPoly:
    """Parse the canonical printer's syntax (whitespace-tolerant)."""
    s = text.strip()
    if not s:
        raise ValueError("empty polynomial text")
    if s == "0":
        return DiffPoly()
    if s[0] not in "+-":
        s = "+" + s
    pieces = _TERM_SPLIT.split(s)
    # pieces: ['', sign, term, sign, term, ...]
    if pieces[0].strip():
        raise ValueError(f"malformed polynomial text: {text!r}")
    acc = DiffPoly()
    for sign, body in zip(pieces[1::2], pieces[2::2]):
        if not body:
            raise ValueError(f"dangling sign in {text!r}")
        coeff = Fraction(1)
        mono: Dict[Sym, int] = {}
        for factor in body.split("*"):
            factor = factor.strip()
            if re.fullmatch(r"\d+(/\d+)?", factor):
                coeff *= Fraction(factor)
                continue
            if "^" in factor:
                name, exp = factor.split("^", 1)
                e = int(exp)
            else:
                name, e = factor, 1
            sym = parse_sym(name)
            mono[sym] = mono.get(sym, 0) + e
        if sign == "-":
            coeff = -coeff
        acc = acc + DiffPoly({tuple(sorted(mono.items())): coeff})
    return acc


def poly_sum(items: Iterable[DiffPoly]) -> DiffPoly:
    acc = DiffPoly()
    for p in items:
        acc = acc + p
    return acc


def taylor_coefficient(a: int, b: int) -> Fraction:
    return Fraction(1, factorial(a) * factorial(b))
