"""Linear stability conditions, run monitoring and frozen-coefficient mode experiments.

``S = nu tau / h^2``, ``CFL = a tau / h`` and ``S* = (nu + a h CFL / 2) tau / h^2``.
The classical conditions are the standard textbook ones; the invariant-scheme conditions are

    CFL^2 - 2 S - 2 Omega tau <= 0   and   0 <= 4 S / 3 - 2 S^2 + Omega tau <= 1/2.

The mode experiments step the linearised schemes (``u_t + a u_x = nu u_xx`` with
frozen ``Omega``) on a periodic grid, one Fourier mode per row, and measure growth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

STABLE = "stable"
UNSTABLE = "unstable"
UNCONDITIONAL = "unconditional"

CLASSICAL = ("ftcs", "lax_wendroff", "crank_nicolson")
GROWTH_THRESHOLD = 1.01
GROWTH_STEPS = 200


@dataclass(frozen=True)
class StabilityParams:
    S: float
    CFL: float
    S_star: float = 0.0
    omega_tau: float = 0.0

    @classmethod
    def from_numbers(cls, S: float, CFL: float, omega_tau: float = 0.0) -> "StabilityParams":
        """``S*`` follows from ``S`` and ``CFL``: ``S* = S + CFL^2 / 2``."""
        return cls(S, CFL, S + CFL * CFL / 2, omega_tau)

    @classmethod
    def from_physical(cls, nu: float, a: float, h: float, tau: float,
                      omega_tau: float = 0.0) -> "StabilityParams":
        S = nu * tau / h ** 2
        CFL = a * tau / h
        return cls(S, CFL, (nu + a * h * CFL / 2) * tau / h ** 2, omega_tau)


def check_classical(scheme: str, sp: StabilityParams) -> str:
    if scheme == "ftcs":
        return STABLE if sp.S <= 0.5 and sp.CFL <= 1 else UNSTABLE
    if scheme == "lax_wendroff":
        return STABLE if sp.S_star <= 0.5 and sp.CFL <= 1 else UNSTABLE
    if scheme == "crank_nicolson":
        return UNCONDITIONAL
    raise ValueError(f"no classical condition for scheme {scheme!r}")


@dataclass(frozen=True)
class InvariantVerdict:
    slack1: float  # CFL^2 - 2S - 2 Omega tau, must be <= 0
    middle: float  # 4S/3 - 2S^2 + Omega tau, must lie in [0, 1/2]
    caveat: bool  # |Omega tau| beyond the threshold: conditions are only necessary

    @property
    def cond1(self) -> bool:
        return self.slack1 <= 0

    @property
    def cond2(self) -> bool:
        return 0 <= self.middle <= 0.5

    @property
    def stable(self) -> bool:
        return self.cond1 and self.cond2

    @property
    def at_boundary(self) -> bool:
        return self.stable and (self.slack1 == 0 or self.middle in (0.0, 0.5))

    @property
    def verdict(self) -> str:
        return STABLE if self.stable else UNSTABLE

    def describe(self) -> str:
        text = (f"{self.verdict}: CFL^2-2S-2Wt = {self.slack1:.6g} (<= 0 {'ok' if self.cond1 else 'violated'}), "
                f"4S/3-2S^2+Wt = {self.middle:.6g} (in [0,1/2] {'ok' if self.cond2 else 'violated'})")
        if self.at_boundary:
            text += " [on the boundary]"
        if self.caveat:
            text += " [|Omega tau| is not small: conditions are necessary only]"
        return text


def check_invariant(sp: StabilityParams, caveat_threshold: float = 0.05) -> InvariantVerdict:
    slack1 = sp.CFL ** 2 - 2 * sp.S - 2 * sp.omega_tau
    middle = 4 * sp.S / 3 - 2 * sp.S ** 2 + sp.omega_tau
    return InvariantVerdict(slack1, middle, abs(sp.omega_tau) > caveat_threshold)


def check_invariant_field(S: float, CFL: float, omega_tau, caveat_threshold: float = 0.05) -> InvariantVerdict:
    """Conditions at every half point at once.

    Both conditions are linear in ``Omega tau``, so checking the smallest and the
    largest pointwise value covers the whole grid. The failing (or, when both hold,
    the upper) verdict is returned; ``caveat`` looks at the largest magnitude.
    """
    wt = np.asarray(omega_tau, dtype=float)
    lo = check_invariant(StabilityParams.from_numbers(S, CFL, float(np.min(wt))), caveat_threshold)
    hi = check_invariant(StabilityParams.from_numbers(S, CFL, float(np.max(wt))), caveat_threshold)
    caveat = bool(np.max(np.abs(wt)) > caveat_threshold)
    pick = lo if not lo.stable else hi
    return InvariantVerdict(pick.slack1, pick.middle, caveat)


def check(scheme: str, sp: StabilityParams, caveat_threshold: float = 0.05) -> str:
    """Verdict for any catalogued scheme; ``high_order`` uses the invariant conditions."""
    if scheme in CLASSICAL:
        return check_classical(scheme, sp)
    if scheme in ("invariant", "high_order"):
        return check_invariant(sp, caveat_threshold).verdict
    raise ValueError(f"unknown scheme {scheme!r}")


# -- amplification factors --------------------------------------------------------------

def amplification_factor(scheme: str, S: float, CFL: float, theta, omega_tau: float = 0.0):
    """Von Neumann factor ``G(theta)`` of the frozen-coefficient linear scheme."""
    theta = np.asarray(theta, dtype=float)
    w = 1 - np.cos(theta)
    s = np.sin(theta)
    if scheme == "ftcs":
        return 1 - 2 * S * w - 1j * CFL * s
    if scheme == "lax_wendroff":
        return 1 - (2 * S + CFL ** 2) * w + 2 * S * S * w * w - 1j * CFL * s * (1 - 2 * S * w)
    if scheme == "crank_nicolson":
        half = 0.5 * (2 * S * w + 1j * CFL * s)
        return (1 - half) / (1 + half)
    if scheme in ("invariant", "high_order"):
        return (1 - 2 * (S + omega_tau) * w - S * w * w / 3 + 2 * S * S * w * w
                - 1j * CFL * s * (1 + w / 3 - 2 * S * w))
    raise ValueError(f"unknown scheme {scheme!r}")


# -- linear frozen-coefficient schemes on a periodic grid ------------------------------------

def _sh(v: np.ndarray, k: int) -> np.ndarray:
    """``v`` at offset ``+k`` along the last axis, periodically."""
    return np.roll(v, -k, axis=-1)


def _d2(v):
    return _sh(v, 1) - 2 * v + _sh(v, -1)


def _d4(v):
    return _sh(v, 2) - 4 * _sh(v, 1) + 6 * v - 4 * _sh(v, -1) + _sh(v, -2)


def _mu_d(v):
    return 0.5 * (_sh(v, 1) - _sh(v, -1))


def _mu_d3(v):
    return 0.5 * (_sh(v, 2) - 2 * _sh(v, 1) + 2 * _sh(v, -1) - _sh(v, -2))


def linear_step(scheme: str, v: np.ndarray, S: float, CFL: float, omega_tau: float = 0.0) -> np.ndarray:
    """One step of the linearised scheme, written with the difference operators (no ``G``)."""
    if scheme == "ftcs":
        return v - CFL * _mu_d(v) + S * _d2(v)
    # -tau times the nu tau corrections: nu tau a mu delta^3 / h^3 - nu^2 tau/2 delta^4 / h^4
    nu_corr = -S * CFL * _mu_d3(v) + 0.5 * S * S * _d4(v)
    if scheme == "lax_wendroff":
        return v - CFL * _mu_d(v) + S * _d2(v) + 0.5 * CFL * CFL * _d2(v) + nu_corr
    if scheme in ("invariant", "high_order"):
        core = -CFL * (_mu_d(v) - _mu_d3(v) / 6) + S * (_d2(v) - _d4(v) / 12)
        return v + core + omega_tau * _d2(v) + nu_corr
    if scheme == "crank_nicolson":
        n = v.shape[-1]
        eye = np.eye(n)
        # rows of op(eye) are op(e_r); the operator matrix is its transpose
        L = ((CFL * _mu_d(eye) - S * _d2(eye)) / 2).T
        return np.linalg.solve(eye + L, ((eye - L) @ v.T)).T
    raise ValueError(f"unknown scheme {scheme!r}")


def mode_growth(scheme: str, S: float, CFL: float, omega_tau: float = 0.0,
                steps: int = GROWTH_STEPS, n: int = 64) -> float:
    """Largest ``|v_steps| / |v_0|`` over single Fourier-mode initial data on ``n`` points."""
    j = np.arange(n)
    k = np.arange(1, n // 2 + 1)[:, None]
    v = np.vstack([np.cos(2 * np.pi * k * j / n), np.sin(2 * np.pi * k * j / n)])
    v0 = np.linalg.norm(v, axis=1)
    keep = v0 > 1e-12
    v, v0 = v[keep], v0[keep]
    for _ in range(steps):
        v = linear_step(scheme, v, S, CFL, omega_tau)
        if not np.all(np.isfinite(v)):
            return float("inf")
    return float(np.max(np.linalg.norm(v, axis=1) / v0))


@dataclass(frozen=True)
class MapCell:
    S: float
    CFL: float
    predicted: str
    growth: float

    @property
    def observed(self) -> str:
        return UNSTABLE if self.growth > GROWTH_THRESHOLD else STABLE

    @property
    def agrees(self) -> bool:
        return (self.predicted == UNSTABLE) == (self.observed == UNSTABLE)


def stability_map(scheme: str, S_values: Sequence[float], CFL_values: Sequence[float],
                  omega_tau: float = 0.0, steps: int = GROWTH_STEPS) -> List[MapCell]:
    cells = []
    for S in S_values:
        for CFL in CFL_values:
            sp = StabilityParams.from_numbers(S, CFL, omega_tau)
            cells.append(MapCell(S, CFL, check(scheme, sp), mode_growth(scheme, S, CFL, omega_tau, steps)))
    return cells


def format_map(cells: Iterable[MapCell]) -> str:
    lines = ["S,CFL,predicted,observed,growth"]
    for c in cells:
        lines.append(f"{c.S:g},{c.CFL:g},{c.predicted},{c.observed},{c.growth:.6g}")
    return "\n".join(lines) + "\n"


# -- run monitoring ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonitorRecord:
    step: int
    time: float
    max_omega_tau: float
    verdict: str
    norm: float
    nan_index: Optional[int] = None


@dataclass
class RunMonitor:
    """Per-step report on a running simulation; reads fields, never changes them."""

    scheme: str
    grid: object
    params: object  # schemes.StepParams
    a: float
    caveat_threshold: float = 0.05
    records: List[MonitorRecord] = field(default_factory=list)
    first_doubling: Optional[int] = None
    _norm0: Optional[float] = None

    def observe(self, f, step_index: int) -> MonitorRecord:
        from .schemes import CSpec, StepParams, half_point_omega_tau

        g, p = self.grid, self.params
        values = np.asarray(f.values)
        bad = ~np.isfinite(values)
        nan_index = int(np.argmax(bad)) if bad.any() else None
        norm = float(np.sqrt(g.h * np.sum(values[g.physical] ** 2))) if nan_index is None else float("inf")
        if self._norm0 is None:
            self._norm0 = norm
        elif self.first_doubling is None and norm >= 2 * self._norm0:
            self.first_doubling = step_index
        sp = StabilityParams.from_physical(p.nu, self.a, g.h, p.tau)
        max_wt = 0.0
        if nan_index is not None:
            verdict = UNSTABLE
        elif self.scheme in ("invariant", "high_order"):
            q = p if self.scheme == "invariant" else StepParams(p.tau, p.nu, CSpec.zero())
            wt = half_point_omega_tau(f, q, g)
            max_wt = float(np.max(np.abs(wt)))
            verdict = check_invariant_field(sp.S, sp.CFL, wt, self.caveat_threshold).verdict
        else:
            verdict = check_classical(self.scheme, sp)
        rec = MonitorRecord(step_index, float(f.time), max_wt, verdict, norm, nan_index)
        self.records.append(rec)
        return rec

    @property
    def all_stable(self) -> bool:
        return all(r.verdict != UNSTABLE for r in self.records)


def monitor_run(scheme: str, states, grid, params, a: float,
                caveat_threshold: float = 0.05) -> RunMonitor:
    """Consume ``(step_index, field)`` pairs and return the filled monitor."""
    mon = RunMonitor(scheme, grid, params, a, caveat_threshold)
    for k, f in states:
        mon.observe(f, k)
    return mon
