from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import strategies as st

from invburgers import diffalg as da
from invburgers.diffalg import H, NU, T, TAU, X, U

# -- sympy bridge (oracle side) -------------------------------------------------------

SX, ST, SNU, SH, STAU = sp.symbols("x t nu h tau")
UFUN = sp.Function("u")(SX, ST)
_BASE = {X: SX, T: ST, NU: SNU, H: SH, TAU: STAU}


def sym_of(s):
    if s in _BASE:
        return _BASE[s]
    if s.a == 0 and s.b == 0:
        return UFUN
    args = [(SX, s.a)] if s.a else []
    args += [(ST, s.b)] if s.b else []
    return sp.Derivative(UFUN, *args)


def to_sympy(p: da.DiffPoly):
    total = sp.Integer(0)
    for m, c in p.items():
        term = sp.Rational(c.numerator, c.denominator)
        for s, e in m:
            term *= sym_of(s) ** e
        total += term
    return total


def _canonical(expr):
    """Replace every derivative of ``u`` by a plain symbol keyed on its derivative counts."""

    def name(d):
        counts = dict(d.variable_count)
        return sp.Symbol(f"u_{counts.get(SX, 0)}_{counts.get(ST, 0)}")

    return expr.replace(lambda e: isinstance(e, sp.Derivative), name)


def sympy_equal(a, b) -> bool:
    return sp.expand(_canonical(sp.expand(a)) - _canonical(sp.expand(b))) == 0


# -- hypothesis strategies --------------------------------------------------------------

SYMBOLS = [X, T, NU, H, TAU, U(0), U(1), U(2), U(0, 1), U(1, 1)]


@st.composite
def diffpolys(draw, max_terms=4, max_exp=2, symbols=SYMBOLS):
    n = draw(st.integers(0, max_terms))
    acc = da.DiffPoly()
    for _ in range(n):
        c = Fraction(draw(st.integers(-6, 6)), draw(st.integers(1, 4)))
        k = draw(st.integers(0, 3))
        mono = {}
        for _ in range(k):
            s = draw(st.sampled_from(symbols))
            mono[s] = mono.get(s, 0) + draw(st.integers(1, max_exp))
        acc = acc + da.DiffPoly({tuple(sorted(mono.items())): c})
    return acc


@pytest.fixture
def report(capsys):
    """Print one line straight to the terminal (survives output capture)."""

    def emit(line: str) -> None:
        with capsys.disabled():
            print(f"\n{line}")

    return emit
