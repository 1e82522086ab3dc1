import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from invburgers.problems import exact_pulse
from invburgers.schemes import CSpec, Field, Grid1D, StepParams, step
from invburgers.stability import (STABLE, UNCONDITIONAL, UNSTABLE, StabilityParams,
                                  amplification_factor, check, check_classical, check_invariant,
                                  check_invariant_field, format_map, linear_step, mode_growth,
                                  monitor_run, stability_map)

SCHEMES = ("ftcs", "lax_wendroff", "crank_nicolson", "invariant")


@given(st.sampled_from(SCHEMES), st.floats(0.0, 1.0), st.floats(0.0, 1.5),
       st.integers(1, 15), st.floats(-0.05, 0.05))
@settings(max_examples=80, deadline=None)
def test_linear_step_applies_the_amplification_factor(scheme, S, CFL, k, wt):
    n = 32
    theta = 2 * np.pi * k / n
    v = np.exp(1j * theta * np.arange(n))
    out = linear_step(scheme, v.real, S, CFL, wt) + 1j * linear_step(scheme, v.imag, S, CFL, wt)
    G = amplification_factor(scheme, S, CFL, theta, wt)
    np.testing.assert_allclose(out, G * v, atol=1e-12)


@given(st.floats(0.0, 50.0), st.floats(0.0, 50.0), st.floats(0.0, 2 * np.pi))
@settings(max_examples=80, deadline=None)
def test_crank_nicolson_never_amplifies(S, CFL, theta):
    assert abs(amplification_factor("crank_nicolson", S, CFL, theta)) <= 1 + 1e-12


def test_classical_conditions():
    assert check_classical("ftcs", StabilityParams.from_numbers(0.5, 1.0)) == STABLE
    assert check_classical("ftcs", StabilityParams.from_numbers(0.51, 0.5)) == UNSTABLE
    assert check_classical("lax_wendroff", StabilityParams.from_numbers(0.3, 0.5)) == STABLE
    assert check_classical("lax_wendroff", StabilityParams.from_numbers(0.3, 0.7)) == UNSTABLE
    assert check_classical("crank_nicolson", StabilityParams.from_numbers(9.0, 9.0)) == UNCONDITIONAL
    with pytest.raises(ValueError):
        check_classical("invariant", StabilityParams.from_numbers(0.1, 0.1))


def test_s_star_from_physical_matches_formula():
    nu, a, h, tau = 0.3, 2.0, 0.1, 0.01
    sp = StabilityParams.from_physical(nu, a, h, tau)
    assert sp.S == pytest.approx(nu * tau / h ** 2)
    assert sp.CFL == pytest.approx(a * tau / h)
    assert sp.S_star == pytest.approx(sp.S + sp.CFL ** 2 / 2)


def test_invariant_conditions_and_boundary():
    v = check_invariant(StabilityParams.from_numbers(0.3, 0.5))
    assert v.cond1 and v.cond2 and v.verdict == STABLE and not v.caveat
    assert check_invariant(StabilityParams.from_numbers(0.3, 1.0)).verdict == UNSTABLE
    assert not check_invariant(StabilityParams.from_numbers(0.8, 0.2)).cond2
    edge = check_invariant(StabilityParams.from_numbers(0.5, 1.0))
    assert edge.at_boundary and "boundary" in edge.describe()
    assert check_invariant(StabilityParams.from_numbers(0.3, 0.5, 0.2)).caveat
    assert check("high_order", StabilityParams.from_numbers(0.3, 0.5)) == STABLE


def test_field_check_uses_extremes():
    wt = np.array([-0.01, 0.0, 0.3])
    v = check_invariant_field(0.3, 0.5, wt)
    assert not v.stable  # 4S/3 - 2S^2 + 0.3 exceeds 1/2
    assert v.caveat
    assert check_invariant_field(0.3, 0.5, np.zeros(4)).stable


@pytest.mark.parametrize("scheme, S, CFL, stable", [
    ("ftcs", 0.3, 0.5, True), ("ftcs", 0.6, 0.5, False),
    ("lax_wendroff", 0.2, 0.5, True), ("lax_wendroff", 0.2, 1.2, False),
    ("crank_nicolson", 3.0, 3.0, True),
    ("invariant", 0.3, 0.5, True), ("invariant", 0.7, 0.5, False),
])
def test_mode_growth_examples(scheme, S, CFL, stable):
    assert (mode_growth(scheme, S, CFL) <= 1.01) == stable


def test_map_format():
    cells = stability_map("ftcs", [0.2, 0.7], [0.5], steps=50)
    text = format_map(cells)
    assert text.splitlines()[0] == "S,CFL,predicted,observed,growth"
    assert [c.agrees for c in cells] == [True, True]


def test_monitor_flags_nan_and_doubling():
    g = Grid1D.spanning(0.0, 40.0, 41)
    p = StepParams(0.01, 0.5)
    ok = Field(np.ones(g.size), 0.0)
    big = Field(3 * np.ones(g.size), 0.1)
    bad_vals = np.ones(g.size)
    bad_vals[7] = np.inf
    mon = monitor_run("ftcs", [(0, ok), (1, big), (2, Field(bad_vals, 0.2))], g, p, a=1.0)
    assert mon.first_doubling == 1
    assert mon.records[-1].nan_index == 7 and mon.records[-1].verdict == UNSTABLE
    assert not mon.all_stable


def test_monitor_reads_omega_on_a_real_run():
    nu = 0.5
    ref = exact_pulse(nu)
    g = Grid1D.spanning(0.0, 40.0, 81)
    p = StepParams(0.01, nu, CSpec(-0.01))
    f = Field(ref.value(g.x_all, 0.0), 0.0)
    states = []
    for k in range(3):
        states.append((k, f))
        f = step("invariant", f, p, g, lambda xs, t: ref.value(xs, t))
    before = [s.values.copy() for _, s in states]
    mon = monitor_run("invariant", states, g, p, a=float(np.max(ref.value(g.x, 0.0))))
    assert mon.all_stable
    assert all(r.max_omega_tau > 0 for r in mon.records)
    for (_, s), b in zip(states, before):
        assert np.array_equal(s.values, b)


@pytest.mark.parametrize("scheme", ["ftcs", "lax_wendroff", "crank_nicolson", "high_order"])
def test_linear_step_is_the_linearisation_of_the_stepper(scheme):
    # finite perturbation of a constant state; the frozen Omega tau of the C = 0 flux is CFL^2/2
    g = Grid1D.spanning(0.0, 10.0, 101)
    a, nu, tau, eps = 1.3, 0.05, 0.004, 1e-7
    S, CFL = nu * tau / g.h ** 2, a * tau / g.h
    v = np.zeros(g.size)
    v[30:70] = np.random.default_rng(1).standard_normal(40)
    bc = lambda xs, t: np.full_like(xs, a)  # noqa: E731
    p = StepParams(tau, nu)
    d = (step(scheme, Field(a + eps * v, 0.0), p, g, bc, tol=1e-15).values
         - step(scheme, Field(np.full(g.size, a), 0.0), p, g, bc).values) / eps
    wt = CFL ** 2 / 2 if scheme == "high_order" else 0.0
    lin = linear_step(scheme, v[None, :], S, CFL, wt)[0]
    np.testing.assert_allclose(d[20:80], lin[20:80], atol=1e-6)


def test_ftcs_sharp_condition_matches_mode_growth():
    # S <= 1/2 together with CFL^2 <= 2S is the exact region; S <= 1/2, CFL <= 1 is not sufficient
    cells = stability_map("ftcs", [0.3, 0.4, 0.5, 0.6, 0.7], [0.7, 0.85, 1.0, 1.15, 1.3])
    sharp = [(c.S <= 0.5 and c.CFL ** 2 <= 2 * c.S) == (c.observed == STABLE) for c in cells]
    assert all(sharp)


@pytest.mark.parametrize("omega_tau", [-0.02, 0.02, 0.04])
def test_invariant_conditions_with_frozen_omega(omega_tau):
    cells = stability_map("invariant", [0.1, 0.3, 0.5, 0.65, 0.7], [0.2, 0.5, 0.8, 1.0, 1.2],
                          omega_tau=omega_tau)
    assert sum(c.agrees for c in cells) >= 24
