"""Time stepping for the catalogued Burgers schemes on a uniform grid.

Every scheme is written as ``(u^{n+1} - u^n)/tau + R(u) = s`` with the same
undivided difference operators used symbolically in :mod:`invburgers.modeq`.
Values at half points are averages of the two neighbours and ``u_x`` there is
``(u_{i+1} - u_i)/h``. Two ghost layers on each side, together with both
endpoints, are Dirichlet data refreshed from the boundary provider every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

SCHEMES = ("ftcs", "lax_wendroff", "crank_nicolson", "high_order", "invariant")

Boundary = Callable[[np.ndarray, float], np.ndarray]
Source = Callable[[np.ndarray, float], np.ndarray]


class InstabilityError(RuntimeError):
    def __init__(self, index: int, time: float, message: str = ""):
        super().__init__(message or f"non-finite value at grid index {index}, t = {time:.6g}")
        self.index = index
        self.time = time


class ConvergenceError(RuntimeError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(f"Newton iteration stalled after {iterations} steps, residual {residual:.3e}")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class Grid1D:
    x0: float
    h: float
    n_points: int
    ghost_depth: int = 2

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.n_points < 5:
            raise ValueError("n_points must be >= 5")
        if self.ghost_depth < 2:
            raise ValueError("ghost_depth must be >= 2")

    @classmethod
    def spanning(cls, x0: float, x1: float, n_points: int, ghost_depth: int = 2) -> "Grid1D":
        return cls(x0, (x1 - x0) / (n_points - 1), n_points, ghost_depth)

    @property
    def size(self) -> int:
        return self.n_points + 2 * self.ghost_depth

    @property
    def x_end(self) -> float:
        return self.x0 + (self.n_points - 1) * self.h

    @property
    def x_all(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(-self.ghost_depth, self.n_points + self.ghost_depth)

    @property
    def x(self) -> np.ndarray:
        return self.x_all[self.physical]

    @property
    def physical(self) -> slice:
        return slice(self.ghost_depth, self.ghost_depth + self.n_points)

    @property
    def interior(self) -> slice:
        """Points updated by the schemes: physical points minus both endpoints."""
        return slice(self.ghost_depth + 1, self.ghost_depth + self.n_points - 1)

    @property
    def boundary_index(self) -> np.ndarray:
        g, n = self.ghost_depth, self.n_points
        return np.r_[0:g + 1, g + n - 1:self.size]


@dataclass
class Field:
    values: np.ndarray
    time: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class CSpec:
    """Artificial viscosity ``C = kappa * t * (t*u - x)**2 * u_x**2``; ``kappa = 0`` is the zero form."""

    kappa: float = 0.0

    @classmethod
    def zero(cls) -> "CSpec":
        return cls(0.0)

    @property
    def is_zero(self) -> bool:
        return self.kappa == 0.0

    def __call__(self, x, t, u, ux):
        if self.is_zero:
            return np.zeros_like(np.asarray(u, dtype=float) * 1.0)
        return self.kappa * t * (t * u - x) ** 2 * ux ** 2

    def as_diffpoly(self):
        from .symmetry import default_viscosity

        return default_viscosity(Fraction(self.kappa).limit_denominator(10 ** 12))


@dataclass(frozen=True)
class StepParams:
    tau: float
    nu: float
    cspec: CSpec = CSpec()

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.nu < 0:
            raise ValueError("nu must be non-negative")


# -- Hildebrand operators on sampled data -----------------------------------------------

_HALF = Fraction(1, 2)


def _binomial_weights(n: int):
    from math import comb

    return {Fraction(k) - Fraction(n, 2): (-1) ** (n - k) * comb(n, k) for k in range(n + 1)}


def _op_weights(kind: str, alpha=None):
    if kind == "delta":
        return {_HALF: 1, -_HALF: -1}
    if kind == "mu":
        return {_HALF: 0.5, -_HALF: 0.5}
    if kind == "delta_plus":
        return {Fraction(1): 1, Fraction(0): -1}
    if kind == "delta_minus":
        return {Fraction(0): 1, Fraction(-1): -1}
    if kind == "shift":
        if alpha is None:
            raise ValueError("shift needs alpha")
        return {Fraction(alpha): 1}
    if kind in ("delta2", "delta3", "delta4"):
        return _binomial_weights(int(kind[-1]))
    if kind == "mu_delta":
        return {Fraction(1): 0.5, Fraction(-1): -0.5}
    if kind == "mu_delta3":
        return {Fraction(2): 0.5, Fraction(1): -1, Fraction(-1): 1, Fraction(-2): -0.5}
    raise ValueError(f"unknown operator {kind!r}")


def discrete_op(kind: str, f, i, alpha=None) -> float:
    """Undivided difference ``kind`` of the samples ``f`` (array or :class:`Field`) at index ``i``.

    ``i`` may be a half integer; values at half-integer positions are neighbour averages.
    """
    values = f.values if isinstance(f, Field) else np.asarray(f, dtype=float)
    i = Fraction(i).limit_denominator(2)
    total = 0.0
    for off, w in _op_weights(kind, alpha).items():
        j = i + off
        if j.denominator == 1:
            idx = (int(j),)
        elif j.denominator == 2:
            idx = (int(j - _HALF), int(j + _HALF))
        else:
            raise ValueError("only integer and half-integer positions are supported")
        if min(idx) < 0 or max(idx) >= len(values):
            raise IndexError(f"{kind} at {i} needs samples outside 0..{len(values) - 1}")
        total += w * sum(values[k] for k in idx) / len(idx)
    return total


def compute_omega(x, t, u_half, ux_half, p: StepParams, h: float):
    """``Omega = (tau u^2/2 - C)/h^2``, so that ``C = tau u^2/2 - h^2 Omega``."""
    return (p.tau * u_half ** 2 / 2 - p.cspec(x, t, u_half, ux_half)) / h ** 2


# -- spatial residuals ---------------------------------------------------------------------
# Arrays below are the full field (ghosts included); results cover grid.interior.

def _sl(g: Grid1D, k: int) -> slice:
    s = g.interior
    return slice(s.start + k, s.stop + k)


def _ftcs_residual(u, g: Grid1D, p: StepParams):
    f = 0.5 * u * u
    h = g.h
    return ((f[_sl(g, 1)] - f[_sl(g, -1)]) / (2 * h)
            - p.nu * (u[_sl(g, 1)] - 2 * u[_sl(g, 0)] + u[_sl(g, -1)]) / h ** 2)


def _half_values(u, g: Grid1D):
    """``u`` and ``u_x`` at ``i + 1/2`` and ``i - 1/2`` for every interior ``i``."""
    up = 0.5 * (u[_sl(g, 1)] + u[_sl(g, 0)])
    um = 0.5 * (u[_sl(g, 0)] + u[_sl(g, -1)])
    return up, um


def _nu_corrections(u, g: Grid1D, p: StepParams):
    h, nu, tau = g.h, p.nu, p.tau
    d2 = np.zeros_like(u)
    d2[1:-1] = u[2:] - 2 * u[1:-1] + u[:-2]
    # mu delta^2 u at i +- 1/2
    m_plus = 0.5 * (d2[_sl(g, 1)] + d2[_sl(g, 0)])
    m_minus = 0.5 * (d2[_sl(g, 0)] + d2[_sl(g, -1)])
    up, um = _half_values(u, g)
    f = 0.5 * u * u
    mu_d3f = 0.5 * (f[_sl(g, 2)] - 2 * f[_sl(g, 1)] + 2 * f[_sl(g, -1)] - f[_sl(g, -2)])
    d4 = (u[_sl(g, 2)] - 4 * u[_sl(g, 1)] + 6 * u[_sl(g, 0)] - 4 * u[_sl(g, -1)] + u[_sl(g, -2)])
    return (0.5 * nu * tau * (up * m_plus - um * m_minus) / h ** 3
            - 0.5 * nu * nu * tau * d4 / h ** 4
            + 0.5 * nu * tau * mu_d3f / h ** 3)


def _lax_wendroff_residual(u, g: Grid1D, p: StepParams):
    f = 0.5 * u * u
    up, um = _half_values(u, g)
    dpf = f[_sl(g, 1)] - f[_sl(g, 0)]
    dmf = f[_sl(g, 0)] - f[_sl(g, -1)]
    A = -0.5 * p.tau * (up * dpf - um * dmf) / g.h ** 2 + _nu_corrections(u, g, p)
    return _ftcs_residual(u, g, p) + A


def omega_h2_half(u, g: Grid1D, p: StepParams, t: float):
    """``h^2 Omega`` at ``i + 1/2`` for every ``i`` in ``interior`` shifted by ``-1 .. 0``.

    Returns an array one longer than the interior: entry ``k`` sits at the half point
    between interior positions ``k - 1`` and ``k``.
    """
    s = g.interior
    lo = slice(s.start - 1, s.stop)
    hi = slice(s.start, s.stop + 1)
    u_half = 0.5 * (u[lo] + u[hi])
    ux_half = (u[hi] - u[lo]) / g.h
    x_half = g.x_all[lo] + 0.5 * g.h
    out = 0.5 * p.tau * u_half * u_half
    if not p.cspec.is_zero:
        out = out - p.cspec(x_half, t, u_half, ux_half)
    return out, x_half, u_half, ux_half


def _invariant_residual(u, g: Grid1D, p: StepParams, t: float):
    h, nu = g.h, p.nu
    f = 0.5 * u * u
    mu_df = 0.5 * (f[_sl(g, 1)] - f[_sl(g, -1)])
    mu_d3f = 0.5 * (f[_sl(g, 2)] - 2 * f[_sl(g, 1)] + 2 * f[_sl(g, -1)] - f[_sl(g, -2)])
    d2 = u[_sl(g, 1)] - 2 * u[_sl(g, 0)] + u[_sl(g, -1)]
    d4 = (u[_sl(g, 2)] - 4 * u[_sl(g, 1)] + 6 * u[_sl(g, 0)] - 4 * u[_sl(g, -1)] + u[_sl(g, -2)])
    core = (mu_df - mu_d3f / 6) / h - nu * (d2 - d4 / 12) / h ** 2
    w, *_ = omega_h2_half(u, g, p, t)
    s = g.interior
    du = u[s.start:s.stop + 1] - u[s.start - 1:s.stop]  # delta_plus u at i - 1, ..., last
    flux = w * du
    omega_term = (flux[1:] - flux[:-1]) / h ** 2
    return core - omega_term + _nu_corrections(u, g, p)


def spatial_residual(scheme: str, u: np.ndarray, g: Grid1D, p: StepParams, t: float) -> np.ndarray:
    """``R(u)`` on ``grid.interior`` for the explicit schemes."""
    if scheme == "ftcs":
        return _ftcs_residual(u, g, p)
    if scheme == "lax_wendroff":
        return _lax_wendroff_residual(u, g, p)
    if scheme == "invariant":
        return _invariant_residual(u, g, p, t)
    if scheme == "high_order":
        return _invariant_residual(u, g, StepParams(p.tau, p.nu, CSpec.zero()), t)
    raise ValueError(f"no explicit residual for scheme {scheme!r}")


# -- stepping --------------------------------------------------------------------------------

def _check_finite(values: np.ndarray, t: float) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        raise InstabilityError(int(np.argmax(bad)), t)


def _apply_boundary(values: np.ndarray, g: Grid1D, bc: Boundary, t: float) -> None:
    idx = g.boundary_index
    values[idx] = bc(g.x_all[idx], t)


def step(scheme: str, f: Field, p: StepParams, g: Grid1D, bc: Boundary,
         source: Optional[Source] = None, tol: float = 1e-12, max_iter: int = 50) -> Field:
    """Advance ``f`` by one step of ``p.tau``."""
    if len(f.values) != g.size:
        raise ValueError(f"field has {len(f.values)} values, grid expects {g.size}")
    _check_finite(f.values, f.time)
    t_new = f.time + p.tau
    with np.errstate(over="ignore", invalid="ignore"):
        out = _advance(scheme, f, p, g, bc, source, tol, max_iter, t_new)
    _check_finite(out.values, t_new)
    return out


def _advance(scheme, f, p, g, bc, source, tol, max_iter, t_new) -> Field:
    if scheme == "crank_nicolson":
        out = solve_cn_level(f, p, g, bc, tol, max_iter, source)
    elif scheme in SCHEMES:
        u = f.values
        new = u.copy()
        rhs = -spatial_residual(scheme, u, g, p, f.time)
        if source is not None:
            rhs = rhs + source(g.x_all[g.interior], f.time)
        new[g.interior] = u[g.interior] + p.tau * rhs
        _apply_boundary(new, g, bc, t_new)
        out = Field(new, t_new)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")
    return out


def cn_system_residual(v: np.ndarray, u: np.ndarray, g: Grid1D, p: StepParams,
                       forcing: Optional[np.ndarray] = None) -> np.ndarray:
    """``tau`` times the Crank-Nicolson equations at the interior, for candidate level ``v``."""
    s = g.interior
    h, tau, nu = g.h, p.tau, p.nu
    fv, fu = 0.5 * v * v, 0.5 * u * u
    adv = ((fv[_sl(g, 1)] - fv[_sl(g, -1)]) + (fu[_sl(g, 1)] - fu[_sl(g, -1)])) / (4 * h)
    diff = ((v[_sl(g, 1)] - 2 * v[s] + v[_sl(g, -1)])
            + (u[_sl(g, 1)] - 2 * u[s] + u[_sl(g, -1)])) * (nu / (2 * h * h))
    r = v[s] - u[s] + tau * (adv - diff)
    if forcing is not None:
        r = r - tau * forcing
    return r


def solve_cn_level(f: Field, p: StepParams, g: Grid1D, bc: Boundary,
                   tol: float = 1e-12, max_iter: int = 50,
                   source: Optional[Source] = None) -> Field:
    """Damped Newton iteration with a tridiagonal Jacobian for the implicit level."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    u = f.values
    t_new = f.time + p.tau
    v = u.copy()
    _apply_boundary(v, g, bc, t_new)
    s = g.interior
    forcing = None
    if source is not None:
        xs = g.x_all[s]
        forcing = 0.5 * (source(xs, f.time) + source(xs, t_new))
    h, tau, nu = g.h, p.tau, p.nu
    r = cn_system_residual(v, u, g, p, forcing)
    norm = np.max(np.abs(r))
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise ConvergenceError(norm, it)
        it += 1
        n = r.size
        ab = np.zeros((3, n))
        ab[1] = 1.0 + tau * nu / (h * h)
        # d r_i / d v_{i+1} sits in row 0, d r_i / d v_{i-1} in row 2
        ab[0, 1:] = tau * (v[_sl(g, 1)][:-1] / (4 * h) - nu / (2 * h * h))
        ab[2, :-1] = tau * (-v[_sl(g, -1)][1:] / (4 * h) - nu / (2 * h * h))
        delta = solve_banded((1, 1), ab, -r)
        lam = 1.0
        while True:
            trial = v.copy()
            trial[s] = v[s] + lam * delta
            r_new = cn_system_residual(trial, u, g, p, forcing)
            new_norm = np.max(np.abs(r_new))
            if new_norm < norm or lam < 1e-4 or not np.isfinite(new_norm):
                break
            lam *= 0.5
        if not np.isfinite(new_norm):
            raise InstabilityError(int(np.argmax(~np.isfinite(r_new))), t_new)
        if new_norm >= norm and lam < 1e-4:
            raise ConvergenceError(norm, it)
        v, r, norm = trial, r_new, new_norm
    return Field(v, t_new)


def half_point_omega_tau(f: Field, p: StepParams, g: Grid1D) -> np.ndarray:
    """``Omega * tau`` at every interior half point (for stability monitoring)."""
    w, *_ = omega_h2_half(f.values, g, p, f.time)
    return w * p.tau / g.h ** 2
