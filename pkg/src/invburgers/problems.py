"""Reference solutions, frame transformations and problem construction.

Reference solutions are written once against the small dispatch layer in
:mod:`invburgers.jets`, so the same formula yields plain values (numpy) or
derivatives of any order (jets). Frame changes use the one-parameter groups of
the Burgers equation; pushing a solution forward composes the inverse point
map with the solution and the ``u`` map, so derivative outputs pick up the
chain rule automatically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from . import jets
from .jets import Jet

DOMAIN = (0.0, 40.0)
T_FINAL = 20.0
T_OFFSET = 0.1


class FrameError(ValueError):
    pass


# -- closed forms ---------------------------------------------------------------

def pulse_formula(x, t, nu: float):
    """``((x-2t)/(t+0.1)) / (1 + nu^2 sqrt(t+0.1) exp((x-2t)^2 / (4 nu (t+0.1)))) + 2``."""
    s = t + T_OFFSET
    xi = x - 2.0 * t
    # nu^2 sqrt(s) exp(q) = exp(q + 2 log nu + log(s)/2)
    z = xi * xi / (4.0 * nu * s) + 2.0 * np.log(nu) + 0.5 * jets.log(s)
    return 2.0 + xi / s * jets.inv_one_plus_exp(z)


def wave_formula(x, t, nu: float, k: float, eps: float, speed: float):
    """``speed - 2 nu phi_x / phi`` at ``(x - speed t, t)`` with ``phi = 1 + eps exp(-nu k^2 t) cos(k x)``."""
    xi = x - speed * t
    decay = eps * jets.exp(-nu * k * k * t)
    phi = 1.0 + decay * jets.cos(k * xi)
    return speed + 2.0 * nu * k * decay * jets.sin(k * xi) / phi


@dataclass(frozen=True)
class Manufactured:
    """``u = base + amp * sin(k (x - c t)) * exp(-decay t)``; not an exact Burgers solution."""

    base: float = 2.0
    amp: float = 0.5
    k: float = 2 * np.pi / 20.0
    c: float = 1.0
    decay: float = 0.05

    def __call__(self, x, t):
        return self.base + self.amp * jets.sin(self.k * (x - self.c * t)) * jets.exp(-self.decay * t)


# -- reference solutions ----------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceSolution:
    """A field ``u(x, t)`` with its viscosity and an optional source term.

    ``formula(x, t)`` accepts floats, arrays or :class:`Jet` arguments. ``source``,
    when present, is the forcing that makes ``formula`` satisfy the target equation.
    """

    kind: str
    nu: float
    formula: Callable
    label: str = ""
    source: Optional[Callable] = None

    def value(self, x, t) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.formula(x, np.full_like(x, t) if np.ndim(t) == 0 else t), dtype=float)

    def jet(self, x, t, order: int) -> Jet:
        X = Jet.variable(np.asarray(x, dtype=float), "x", order)
        T = Jet.variable(np.broadcast_to(np.asarray(t, dtype=float), np.shape(x)).copy(), "t", order)
        return self.formula(X, T)

    def derivatives(self, x, t):
        """``(u, u_x, u_xx, u_t)`` from an order-2 jet."""
        j = self.jet(x, t, 2)
        return j.value, j.derivative(1, 0), j.derivative(2, 0), j.derivative(0, 1)

    def burgers_residual(self, x, t) -> np.ndarray:
        u, ux, uxx, ut = self.derivatives(x, t)
        return ut + u * ux - self.nu * uxx


def exact_pulse(nu: float) -> ReferenceSolution:
    if nu <= 0:
        raise ValueError("nu must be positive")
    return ReferenceSolution("exact_pulse", nu, lambda x, t: pulse_formula(x, t, nu))


def cole_hopf_wave(nu: float, k: float = 2 * np.pi / 10, eps: float = 0.5,
                   speed: float = 2.0) -> ReferenceSolution:
    """Smooth travelling-and-decaying exact solution used by the convergence studies."""
    if nu <= 0 or not 0 <= eps < 1:
        raise ValueError("need nu > 0 and 0 <= eps < 1")
    return ReferenceSolution("cole_hopf_wave", nu,
                             lambda x, t: wave_formula(x, t, nu, k, eps, speed), "wave")


def exact_eval(x, t, nu: float):
    """``(u, u_x, u_xx, u_t)`` of the exact pulse solution."""
    return exact_pulse(nu).derivatives(x, t)


def manufactured(nu: float, field_: Manufactured = Manufactured(), *,
                 viscosity: Optional[Callable] = None, label: str = "sine") -> ReferenceSolution:
    """Manufactured field with forcing ``u_t + u u_x - nu u_xx + (C u_x)_x``.

    ``viscosity(x, t, u, u_x)`` gives ``C``; omit it for plain Burgers.
    """

    def source(x, t):
        x = np.asarray(x, dtype=float)
        X = Jet.variable(x, "x", 3)
        T = Jet.variable(np.broadcast_to(np.asarray(t, dtype=float), x.shape).copy(), "t", 3)
        uj = field_(X, T)
        ux = uj.dx()
        out = uj.dt().value + uj.value * ux.value - nu * ux.dx().value
        if viscosity is not None:
            C = viscosity(X.truncate(2), T.truncate(2), uj.truncate(2), ux)
            out = out + (C * ux).dx().value
        return out

    return ReferenceSolution("manufactured", nu, field_, label, source)


# -- frame transformations ---------------------------------------------------------------

FRAME_KINDS = ("identity", "space_translation", "time_translation", "dilatation3",
               "projective", "galilean", "dilatation6")
_MULTIPLICATIVE = ("dilatation3", "dilatation6")


@dataclass(frozen=True)
class FrameTransform:
    """One-parameter point transformation of ``(x, t, u, nu)``.

    Translations, projective and Galilean maps are the identity at ``epsilon = 0``;
    the two dilatations use the multiplicative parameter and are the identity at 1.
    """

    kind: str = "identity"
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in FRAME_KINDS:
            raise FrameError(f"unknown frame kind {self.kind!r}")
        if self.kind in _MULTIPLICATIVE and self.epsilon <= 0:
            raise FrameError(f"{self.kind} needs a positive parameter")

    @classmethod
    def parse(cls, text: str) -> "FrameTransform":
        text = text.strip()
        if text in ("", "identity", "none", "F1"):
            return cls()
        if text == "F2":
            return cls("galilean", 1.0)
        if ":" not in text:
            raise FrameError(f"frame must look like kind:epsilon, got {text!r}")
        kind, eps = text.split(":", 1)
        return cls(kind.strip(), float(eps))

    def __str__(self) -> str:
        return "identity" if self.kind == "identity" else f"{self.kind}:{self.epsilon:g}"

    @property
    def is_identity(self) -> bool:
        if self.kind == "identity":
            return True
        return self.epsilon == (1.0 if self.kind in _MULTIPLICATIVE else 0.0)

    def _check_pole(self, t):
        if self.kind == "projective" and np.any(1.0 - self.epsilon * jets.value_of(t) <= 0):
            raise FrameError("projective transformation reaches its pole 1 - eps*t = 0")

    def apply_point(self, x, t, u, nu):
        e = self.epsilon
        k = self.kind
        if k == "identity":
            return x, t, u, nu
        if k == "space_translation":
            return x + e, t, u, nu
        if k == "time_translation":
            return x, t + e, u, nu
        if k == "dilatation3":
            return e * x, e * e * t, u / e, nu
        if k == "projective":
            self._check_pole(t)
            d = 1.0 - e * t
            return x / d, t / d, x * e + u * d, nu
        if k == "galilean":
            return x + e * t, t, u + e, nu
        return x, t / e, e * u, e * nu  # dilatation6

    def preimage(self, xp, tp):
        """``(x, t)`` mapped to ``(xp, tp)``."""
        e = self.epsilon
        k = self.kind
        if k == "identity":
            return xp, tp
        if k == "space_translation":
            return xp - e, tp
        if k == "time_translation":
            return xp, tp - e
        if k == "dilatation3":
            return xp / e, tp / (e * e)
        if k == "projective":
            d = 1.0 + e * tp
            if np.any(jets.value_of(d) <= 0):
                raise FrameError("projective transformation reaches its pole")
            return xp / d, tp / d
        if k == "galilean":
            return xp - e * tp, tp
        return xp, e * tp

    def map_u(self, x, t, u):
        return self.apply_point(x, t, u, 1.0)[2]

    def map_nu(self, nu: float) -> float:
        return self.apply_point(0.0, 0.0, 0.0, nu)[3]

    def compose_parameter(self, other: "FrameTransform") -> "FrameTransform":
        """Parameter of ``other`` after ``self`` for the same kind."""
        if self.kind != other.kind:
            raise FrameError("can only compose transformations of one kind")
        if self.kind in _MULTIPLICATIVE:
            return FrameTransform(self.kind, self.epsilon * other.epsilon)
        return FrameTransform(self.kind, self.epsilon + other.epsilon)


def frame_apply_point(ft: FrameTransform, x, t, u, nu):
    return ft.apply_point(x, t, u, nu)


def frame_pushforward_solution(ft: FrameTransform, ref: ReferenceSolution) -> ReferenceSolution:
    if ft.is_identity:
        return ref
    if ref.source is not None:
        raise FrameError("pushing forward a forced problem is not supported")

    def formula(xp, tp):
        x, t = ft.preimage(xp, tp)
        return ft.map_u(x, t, ref.formula(x, t))

    return ReferenceSolution(ref.kind, ft.map_nu(ref.nu), formula, f"{ref.label}@{ft}".strip("@"))


# -- problem assembly -------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSetup:
    reference: ReferenceSolution
    frame: FrameTransform = FrameTransform()
    domain: Tuple[float, float] = DOMAIN
    t_final: float = T_FINAL

    def __post_init__(self):
        if not self.domain[0] < self.domain[1]:
            raise ValueError("domain must satisfy x_min < x_max")
        if self.t_final < 0:
            raise ValueError("t_final must be non-negative")

    @property
    def active_reference(self) -> ReferenceSolution:
        return frame_pushforward_solution(self.frame, self.reference)


def build_problem(setup: ProblemSetup, grid):
    """Initial :class:`~invburgers.schemes.Field` and a boundary provider ``bc(x, t)``."""
    from .schemes import Field

    lo, hi = setup.domain
    if abs(grid.x0 - lo) > 1e-12 or abs(grid.x_end - hi) > 1e-9:
        raise ValueError(f"grid spans [{grid.x0}, {grid.x_end}], expected [{lo}, {hi}]")
    ref = setup.active_reference
    initial = Field(ref.value(grid.x_all, 0.0), 0.0)
    if not np.all(np.isfinite(initial.values)):
        raise FrameError(f"reference {ref.label or ref.kind} is not finite on the grid at t = 0")

    def boundary(xs, t):
        return ref.value(xs, t)

    return initial, boundary
