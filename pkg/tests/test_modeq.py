import math
from fractions import Fraction

import pytest
import sympy as sp

from invburgers import diffalg as da
from invburgers.diffalg import H, TAU
from invburgers.cli import modeq_golden_path
from invburgers.modeq import (CATALOG_NAMES, ConsistencyError, SchemeCatalogEntry, Stencil, catalog,
                              closed_form_representation, delta, delta_minus, delta_n, delta_plus,
                              differential_approximation, mu, numerical_consistency_check,
                              taylor_expand)
from invburgers.problems import cole_hopf_wave, exact_pulse


def sympy_series(offsets_weights, divisor_power, order):
    """Oracle: Taylor series of ``sum w f(x + p h) / h**divisor_power`` in powers of ``h``."""
    x, h = sp.symbols("x h")
    f = sp.Function("f")
    expr = sum(w * f(x + p * h) for p, w in offsets_weights) / h ** divisor_power
    ser = sp.series(expr, h, 0, order).removeO().doit()
    out = {}
    for k in range(order):
        c = sp.expand(ser).coeff(h, k)
        for n in range(0, 10):
            dn = sp.Derivative(f(x), (x, n)) if n else f(x)
            cc = c.coeff(dn)
            if cc != 0:
                out[(k, n)] = Fraction(int(sp.fraction(cc)[0]), int(sp.fraction(cc)[1]))
    return out


def package_series(st: Stencil, K: int, max_h: int):
    p = taylor_expand(st, K)
    out = {}
    for m, c in p.items():
        d = dict(m)
        if d.get(H, 0) < max_h:
            (s,) = [s for s in d if s.is_u]
            out[(d.get(H, 0), s.a)] = c
    return out


@pytest.mark.parametrize("build, offsets, power", [
    (lambda u: delta(u).over(1), [(Fraction(1, 2), 1), (Fraction(-1, 2), -1)], 1),
    (lambda u: mu(delta(u)).over(1), [(1, Fraction(1, 2)), (-1, Fraction(-1, 2))], 1),
    (lambda u: delta_n(u, 2).over(2), [(1, 1), (0, -2), (-1, 1)], 2),
    (lambda u: delta_plus(u).over(1), [(1, 1), (0, -1)], 1),
    (lambda u: delta_minus(u).over(1), [(0, 1), (-1, -1)], 1),
    (lambda u: delta_n(u, 4).over(4), [(2, 1), (1, -4), (0, 6), (-1, -4), (-2, 1)], 4),
])
def test_operator_series_match_sympy(build, offsets, power):
    st = build(Stencil.value())
    want = sympy_series(offsets, power, 4)
    got = package_series(st, 8, 4)
    assert got == want


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_differential_approximation_equals_closed_form(name):
    assert differential_approximation(catalog(name)) == closed_form_representation(name)


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_modeq_goldens_hold_closed_forms(name):
    literal = da.from_text(modeq_golden_path(name).read_text().strip())
    assert literal == closed_form_representation(name)


def test_leading_order_is_the_target_equation():
    for name in CATALOG_NAMES:
        e = catalog(name)
        lead = da.truncate_grid_order(differential_approximation(e), e.weight_map, 0)
        if name == "invariant":
            assert lead == closed_form_representation("invariant")
        else:
            assert lead == da.from_text("u_t + u*u_x - nu*u_xx")


def test_inconsistent_stencil_is_rejected():
    bad = SchemeCatalogEntry("bad", (Stencil.value(0, 1) - Stencil.value()).over(tau_power=1), (1, 1), 1)
    with pytest.raises(ConsistencyError):
        differential_approximation(bad)


EXPECTED_DEFECT_ORDER = {"ftcs": 4, "lax_wendroff": 3, "crank_nicolson": 3, "high_order": 4, "invariant": 2}


@pytest.mark.parametrize("name", CATALOG_NAMES)
@pytest.mark.parametrize("field", [exact_pulse(1.0), cole_hopf_wave(0.5)], ids=["pulse", "wave"])
def test_numerical_consistency_order(name, field):
    # the stencil minus its modified equation vanishes at the first neglected order
    e = catalog(name)
    p = e.weights[1]
    d = [numerical_consistency_check(e, field, h, h ** p, dps=40) for h in (0.1, 0.05, 0.025)]
    orders = [math.log2(d[i] / d[i + 1]) for i in range(2)]
    assert orders[-1] == pytest.approx(EXPECTED_DEFECT_ORDER[name], abs=0.3)
    assert orders[-1] > e.max_order


def test_consistency_check_float_path_agrees():
    e = catalog("ftcs")
    f = cole_hopf_wave(0.5)
    a = numerical_consistency_check(e, f, 0.1, 0.01)
    b = numerical_consistency_check(e, f, 0.1, 0.01, dps=40)
    assert a == pytest.approx(b, rel=1e-6)


def test_weights_override():
    e = catalog("ftcs")
    coarse = differential_approximation(e, (1, 1), 0)
    assert coarse == da.from_text("u_t + u*u_x - nu*u_xx")
    finer = differential_approximation(e, (1, 1), 1)
    assert da.grid_part(finer, 0, 1) == da.grid_part(closed_form_representation("ftcs"), 0, 1)
    assert da.grid_part(finer, 2, 0).is_zero()
