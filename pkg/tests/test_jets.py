import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from invburgers import jets
from invburgers.jets import Jet


def composite(x, t):
    return jets.exp(jets.sin(x * t)) / (x * x + 1.0) + jets.sqrt(jets.cos(t) + 2.0) * jets.log(x + 3.0)


def test_all_mixed_derivatives_match_sympy():
    x, t = sp.symbols("x t")
    f = sp.exp(sp.sin(x * t)) / (x * x + 1) + sp.sqrt(sp.cos(t) + 2) * sp.log(x + 3)
    x0, t0 = 0.7, -0.4
    order = 4
    J = composite(Jet.variable(x0, "x", order), Jet.variable(t0, "t", order))
    for a in range(order + 1):
        for b in range(order + 1 - a):
            want = float(sp.diff(f, x, a, t, b).subs({x: x0, t: t0})) if a + b else float(f.subs({x: x0, t: t0}))
            assert J.derivative(a, b) == pytest.approx(want, rel=1e-11, abs=1e-11)


@given(st.floats(-2, 2), st.floats(0.1, 2))
@settings(max_examples=40, deadline=None)
def test_reciprocal_and_power(a, b):
    X = Jet.variable(np.array([a]), "x", 3)
    T = Jet.variable(np.array([b]), "t", 3)
    q = (X + T * T) ** 3
    prod = (X + T * T) * (X + T * T) * (X + T * T)
    np.testing.assert_allclose(q.c, prod.c, atol=1e-12)
    r = (T + 1.0).reciprocal() * (T + 1.0)
    np.testing.assert_allclose(r.c[0, 0], 1.0)
    assert np.allclose(r.c.ravel()[1:], 0.0, atol=1e-12)


def test_dx_dt_commute_and_lower_order():
    X, T = Jet.variable(0.3, "x", 4), Jet.variable(1.1, "t", 4)
    f = jets.exp(X * T) * jets.cos(X - T)
    a, b = f.dx().dt(), f.dt().dx()
    assert a.order == 2
    np.testing.assert_allclose(a.c, b.c, atol=1e-13)
    assert f.dx().derivative(1, 1) == pytest.approx(f.derivative(2, 1))
    with pytest.raises(ValueError):
        f.derivative(3, 2)


def test_truncate():
    X = Jet.variable(0.5, "x", 3)
    f = jets.exp(X)
    g = f.truncate(1)
    assert g.order == 1 and g.derivative(1, 0) == pytest.approx(np.exp(0.5))
    with pytest.raises(ValueError):
        g.truncate(2)


def test_dispatch_to_mpmath_and_numpy():
    with mpmath.workdps(30):
        v = jets.exp(mpmath.mpf(1))
        assert isinstance(v, mpmath.mpf)
        assert jets.inv_one_plus_exp(mpmath.mpf(0)) == mpmath.mpf("0.5")
    np.testing.assert_allclose(jets.sin(np.array([0.0, np.pi / 2])), [0.0, 1.0], atol=1e-15)


def test_inv_one_plus_exp_saturates_without_overflow():
    z = np.array([-800.0, 0.0, 800.0])
    with np.errstate(over="raise"):
        out = jets.inv_one_plus_exp(z)
    np.testing.assert_allclose(out, [1.0, 0.5, 0.0])
    Z = Jet.variable(np.array([900.0]), "x", 2)
    assert np.all(np.isfinite(jets.inv_one_plus_exp(Z).c))
