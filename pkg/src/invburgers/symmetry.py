"""Infinitesimal generators, prolongation and on-shell invariance residuals.

Generators act on the space ``(x, t, u, h, tau, nu)``; the prolongation adds
``sigma_(a,b) d/du_(a,b)`` slots built with the usual recursion

    sigma_(J+x) = D_x sigma_J - u_(J+x) D_x xi1 - u_(J+t) D_x xi2

(and the ``t`` analogue). A differential polynomial ``P`` with leading ``u_t``
is invariant when ``pr L (P)`` vanishes after substituting ``P = 0``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from . import diffalg as da
from .diffalg import H, NU, T, TAU, X, DiffPoly, Sym, U

_ZERO = DiffPoly()


class SymmetryError(ValueError):
    pass


@dataclass(frozen=True)
class Generator:
    """``xi1 d/dx + xi2 d/dt + eta d/du + zeta1 d/dh + zeta2 d/dtau + theta d/dnu``."""

    name: str
    xi1: DiffPoly = _ZERO
    xi2: DiffPoly = _ZERO
    eta: DiffPoly = _ZERO
    zeta1: DiffPoly = _ZERO
    zeta2: DiffPoly = _ZERO
    theta: DiffPoly = _ZERO

    def __post_init__(self):
        allowed = {
            "xi1": {X, T, U(0, 0)},
            "xi2": {X, T, U(0, 0)},
            "eta": {X, T, U(0, 0)},
            "zeta1": {X, T, U(0, 0), H, TAU},
            "zeta2": {X, T, U(0, 0), H, TAU},
            "theta": {NU},
        }
        for slot, ok in allowed.items():
            extra = getattr(self, slot).symbols() - ok
            if extra:
                names = ", ".join(sorted(str(s) for s in extra))
                raise SymmetryError(f"{self.name}: {slot} may not depend on {names}")

    def slots(self) -> Tuple[DiffPoly, ...]:
        return (self.xi1, self.xi2, self.eta, self.zeta1, self.zeta2, self.theta)

    def __add__(self, other: "Generator") -> "Generator":
        return Generator(
            f"({self.name}+{other.name})",
            *(a + b for a, b in zip(self.slots(), other.slots())),
        )

    def scale(self, c) -> "Generator":
        return Generator(f"{c}*{self.name}", *(s * Fraction(c) for s in self.slots()))


@dataclass(frozen=True)
class Prolongation:
    base: Generator
    order: int
    sigmas: Mapping[Sym, DiffPoly] = field(default_factory=dict)


def prolong(g: Generator, max_total_order: int) -> Prolongation:
    if max_total_order < 1:
        raise ValueError("max_total_order must be >= 1")
    dx_xi = (da.total_derivative(g.xi1, "x"), da.total_derivative(g.xi2, "x"))
    dt_xi = (da.total_derivative(g.xi1, "t"), da.total_derivative(g.xi2, "t"))
    sig: Dict[Sym, DiffPoly] = {U(0, 0): g.eta}
    for order in range(1, max_total_order + 1):
        for a in range(order, -1, -1):
            b = order - a
            if a >= 1:
                prev = sig[U(a - 1, b)]
                s = (da.total_derivative(prev, "x")
                     - da.u(a, b) * dx_xi[0] - da.u(a - 1, b + 1) * dx_xi[1])
            else:
                prev = sig[U(a, b - 1)]
                s = (da.total_derivative(prev, "t")
                     - da.u(a + 1, b - 1) * dt_xi[0] - da.u(a, b) * dt_xi[1])
            sig[U(a, b)] = s
    return Prolongation(g, max_total_order, sig)


def lie_apply(g: Generator, p: DiffPoly, order: Optional[int] = None,
              prolongation: Optional[Prolongation] = None) -> DiffPoly:
    """Apply the prolonged generator to ``p``."""
    needed = p.max_derivative_order()
    if order is None:
        order = max(needed, 1)
    if needed > order:
        worst = max(p.u_symbols(), key=lambda s: s.order)
        raise SymmetryError(
            f"prolongation order {order} does not cover {worst} (order {worst.order})"
        )
    if prolongation is None or prolongation.order < order:
        prolongation = prolong(g, max(order, 1))
    sig = prolongation.sigmas
    out = DiffPoly()
    for slot, s in ((g.xi1, X), (g.xi2, T), (g.zeta1, H), (g.zeta2, TAU), (g.theta, NU)):
        if slot:
            out = out + slot * da.partial(p, s)
    for s in sorted(p.u_symbols()):
        coeff = sig[s]
        if coeff:
            out = out + coeff * da.partial(p, s)
    return out


def solve_for_ut(p: DiffPoly) -> DiffPoly:
    """Return ``Phi`` with ``p = c*(u_t - Phi)``; requires ``u_t`` to appear linearly with constant coefficient."""
    ut = U(0, 1)
    dp = da.partial(p, ut)
    if dp.is_zero():
        raise SymmetryError("relation does not contain u_t")
    if len(dp) != 1 or dp.constant_term() == 0:
        raise SymmetryError(f"u_t coefficient is not a nonzero constant: {dp}")
    c = dp.constant_term()
    rest = p - da.DiffPoly.sym(ut) * c
    if ut in rest.symbols():
        raise SymmetryError("u_t appears nonlinearly")
    return -rest / c


def onshell_residual(g: Generator, p: DiffPoly,
                     trunc: Optional[Tuple[Mapping[Sym, int], int]] = None) -> DiffPoly:
    """``pr g (p)`` restricted to ``p = 0``, optionally truncated in ``(h, tau)``.

    The relation is solved for ``u_t`` and substituted; leftover time derivatives are
    removed with the leading Burgers relation.
    """
    phi = solve_for_ut(p)
    order = max(p.max_derivative_order(), 1)
    lie = lie_apply(g, p, order)
    res = da.substitute(lie, {U(0, 1): phi})
    res = da.eliminate_time(res)
    if trunc is not None:
        weights, max_order = trunc
        res = da.truncate_grid_order(res, weights, max_order)
    return res


# -- built-in generator sets -------------------------------------------------------

def _P(v) -> DiffPoly:
    return da._coerce(v)


def burgers6() -> List[Generator]:
    x, t, u, nu = da.x, da.t, da.u(), da.nu
    return [
        Generator("L1 space translation", xi1=_P(1)),
        Generator("L2 time translation", xi2=_P(1)),
        Generator("L3 dilatation", xi1=x, xi2=2 * t, eta=-u),
        Generator("L4 projective", xi1=x * t, xi2=t * t, eta=x - u * t),
        Generator("L5 galilean", xi1=t, eta=_P(1)),
        Generator("L6 dilatation", xi2=-t, eta=u, theta=nu),
    ]


def fda4() -> List[Generator]:
    x, t, u, nu, h, tau = da.x, da.t, da.u(), da.nu, da.h, da.tau
    return [
        Generator("L1 space translation", xi1=_P(1)),
        Generator("L2 time translation", xi2=_P(1)),
        Generator("L'3 dilatation", xi1=x, xi2=2 * t, eta=-u, zeta1=h, zeta2=2 * tau),
        Generator("L'4 dilatation", xi2=-t, eta=u, zeta2=-tau, theta=nu),
    ]


def invariant6() -> List[Generator]:
    """One generator per parameter ``a..f`` of the invariant scheme's group."""
    x, t, u, nu, h, tau = da.x, da.t, da.u(), da.nu, da.h, da.tau
    return [
        Generator("a space translation", xi1=_P(1)),
        Generator("b dilatation", xi1=x, xi2=2 * t, eta=-u, zeta1=h, zeta2=2 * tau),
        Generator("c galilean", xi1=t, eta=_P(1)),
        Generator("d projective", xi1=t * x, xi2=t * t, eta=x - t * u),
        Generator("e time translation", xi2=_P(1)),
        Generator("f dilatation", xi2=-t, eta=u, zeta2=-tau, theta=nu),
    ]


GENERATOR_SETS = {"burgers6": burgers6, "fda4": fda4, "invariant6": invariant6}


def builtin_generators(name: str) -> List[Generator]:
    try:
        return GENERATOR_SETS[name]()
    except KeyError:
        raise SymmetryError(f"unknown generator set {name!r}") from None


def burgers_polynomial() -> DiffPoly:
    return da.u(0, 1) + da.u() * da.u(1) - da.nu * da.u(2)


# -- artificial-viscosity constraints ---------------------------------------------

@dataclass(frozen=True)
class ConstraintRow:
    subgroup: str
    residuals: Tuple[DiffPoly, ...]

    @property
    def is_zero(self) -> bool:
        return all(r.is_zero() for r in self.residuals)


def c_constraint_residuals(C: DiffPoly) -> List[ConstraintRow]:
    """Evaluate the per-subgroup linear constraints on a candidate viscosity coefficient ``C``."""
    bad = [s for s in C.u_symbols() if s.b > 0]
    if bad:
        raise SymmetryError(f"C may not contain time derivatives: {', '.join(map(str, sorted(bad)))}")
    d = lambda s: da.partial(C, s)  # noqa: E731
    x, t, u, nu, h, tau = da.x, da.t, da.u(), da.nu, da.h, da.tau
    Cx, Ct, Cu = d(X), d(T), d(U(0, 0))
    return [
        ConstraintRow("space translation", (Cx,)),
        ConstraintRow("time translation", (Ct,)),
        ConstraintRow("dilatation (b)", (x * Cx + 2 * t * Ct - u * Cu + h * d(H) + 2 * tau * d(TAU),)),
        ConstraintRow("projective", (Cx, Cu, d(U(2, 0)), t * t * Ct + 2 * d(U(1, 0)))),
        ConstraintRow("galilean", (Cu + t * Cx,)),
        ConstraintRow("dilatation (f)", (-t * Ct + u * Cu + nu * d(NU) - tau * d(TAU),)),
    ]


def default_viscosity(kappa: Fraction = Fraction(-1, 100)) -> DiffPoly:
    """``C = kappa * t * (t*u - x)**2 * u_x**2``."""
    return kappa * da.t * (da.t * da.u() - da.x) ** 2 * da.u(1) ** 2


def invariant_relation(C: DiffPoly) -> DiffPoly:
    """``u_t + u u_x - nu u_xx + (C u_x)_x``."""
    return burgers_polynomial() + da.total_derivative(C * da.u(1), "x")


# -- reports -----------------------------------------------------------------------

def residual_hash(p: DiffPoly) -> str:
    return hashlib.sha256(da.to_text(p).encode()).hexdigest()[:16]


def leading_term(p: DiffPoly) -> str:
    if p.is_zero():
        return "0"
    return da.to_text(p).split(" + ")[0].split(" - ")[0]


def symmetry_table(results: List[Tuple[str, str, DiffPoly]]) -> str:
    width = max([len(n) for n, _, _ in results] + [9])
    lines = [f"{'generator'.ljust(width)}  {'target':<10}  residual"]
    for name, target, res in results:
        verdict = "= 0" if res.is_zero() else f"!= 0  leading {leading_term(res)}"
        lines.append(f"{name.ljust(width)}  {target:<10}  {verdict}")
    return "\n".join(lines) + "\n"


def symmetry_records(results: List[Tuple[str, str, DiffPoly]]) -> str:
    return "".join(
        f"{name}\t{target}\t{int(res.is_zero())}\t{residual_hash(res)}\n"
        for name, target, res in results
    )


def constraint_report(rows: List[ConstraintRow]) -> str:
    out = []
    for row in rows:
        verdict = "zero" if row.is_zero else "nonzero"
        body = " ; ".join(da.to_text(r) for r in row.residuals)
        out.append(f"{row.subgroup}\t{verdict}\t{body}")
    return "\n".join(out) + "\n"
