"""Run configuration, experiment orchestration and error metrics.

A run integrates one scheme on ``[0, 40]`` from the exact pulse (optionally pushed
into another frame), recording the grid ``L2`` error after every step. Steps are
resolved from the untransformed pulse, so runs in two frames share ``h``, ``tau``
and ``nu`` and differ only by the frame.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .problems import (DOMAIN, FrameError, FrameTransform, ProblemSetup, ReferenceSolution,
                       build_problem, cole_hopf_wave, exact_pulse, manufactured, Manufactured)
from .schemes import (SCHEMES, ConvergenceError, CSpec, Field, Grid1D, InstabilityError,
                      StepParams, half_point_omega_tau, step)
from .stability import (UNSTABLE, StabilityParams, check_classical, check_invariant_field)

MAX_T_FINAL = 20.0


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


# -- configuration ----------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    scheme: str
    cfl: float
    re_h: Optional[float] = None
    nu: Optional[float] = None
    frame: FrameTransform = FrameTransform()
    nx: int = 201
    t_final: float = MAX_T_FINAL
    snapshot_times: Tuple[float, ...] = (5.0,)
    c_kappa: float = -0.01
    output_dir: Optional[str] = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if not self.cfl > 0:
            raise ConfigError("cfl must be positive")
        if (self.re_h is None) == (self.nu is None):
            raise ConfigError("give exactly one of nu and re_h")
        if self.re_h is not None and not self.re_h > 0:
            raise ConfigError("re_h must be positive")
        if self.nu is not None and not self.nu > 0:
            raise ConfigError("nu must be positive")
        if self.nx < 11:
            raise ConfigError("nx must be >= 11")
        if not 0 <= self.t_final <= MAX_T_FINAL:
            raise ConfigError(f"t_final must lie in [0, {MAX_T_FINAL:g}]")
        bad = [t for t in self.snapshot_times if not 0 <= t <= self.t_final]
        if bad:
            raise ConfigError(f"snapshot times {bad} fall outside [0, t_final]")

    @property
    def step_scheme(self) -> str:
        return self.scheme

    @property
    def cspec(self) -> CSpec:
        return CSpec(self.c_kappa) if self.scheme == "invariant" else CSpec.zero()


def _floats(text: str) -> Tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split()]
    return tuple(float(p) for p in parts)


_PARSERS: Dict[str, Callable[[str], object]] = {
    "scheme": str,
    "frame": FrameTransform.parse,
    "nx": int,
    "re_h": float,
    "nu": float,
    "cfl": float,
    "t_final": float,
    "snapshot_times": _floats,
    "c_kappa": float,
    "output_dir": str,
}

CONFIG_HELP = """\
keys (one `key = value` per line, `#` starts a comment):
  scheme          ftcs | lax_wendroff | crank_nicolson | high_order | invariant  (required)
  cfl             a*tau/h, a = max |u(x, 0)| of the untransformed pulse        (required)
  re_h | nu       mesh Reynolds number a*h/nu, or nu directly (exactly one)
  frame           identity | kind:epsilon, e.g. galilean:1        (default identity)
  nx              grid points on [0, 40]                            (default 201)
  t_final         final time, at most 20                            (default 20)
  snapshot_times  comma separated times                             (default 5)
  c_kappa         kappa in C = kappa t (t u - x)^2 u_x^2            (default -0.01)
  output_dir      where `run` writes its files                      (default ./out)
"""


def parse_config(text: str) -> RunConfig:
    values: Dict[str, object] = {}
    lines: Dict[str, int] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected `key = value`, got {body!r}", n)
        key, val = (s.strip() for s in body.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", n)
        if key in values:
            raise ConfigError(f"{key} given twice (first on line {lines[key]})", n)
        try:
            values[key] = _PARSERS[key](val)
        except FrameError as exc:
            raise ConfigError(str(exc), n) from None
        except ValueError:
            raise ConfigError(f"malformed value for {key}: {val!r}", n) from None
        lines[key] = n
        try:
            _check_single(key, values[key])
        except ConfigError as exc:
            raise ConfigError(str(exc), n) from None
    if "nu" in values and "re_h" in values:
        raise ConfigError(f"nu (line {lines['nu']}) and re_h (line {lines['re_h']}) are "
                          "mutually exclusive", max(lines["nu"], lines["re_h"]))
    for key in ("scheme", "cfl"):
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    if "nu" not in values and "re_h" not in values:
        raise ConfigError("missing required key: one of 're_h' or 'nu'")
    return RunConfig(**values)


def _check_single(key: str, value) -> None:
    if key == "scheme" and value not in SCHEMES:
        raise ConfigError(f"unknown scheme {value!r}; choose from {', '.join(SCHEMES)}")
    if key == "cfl" and not value > 0:
        raise ConfigError("cfl must be positive")
    if key in ("re_h", "nu") and not value > 0:
        raise ConfigError(f"{key} must be positive")
    if key == "nx" and value < 11:
        raise ConfigError("nx must be >= 11")
    if key == "t_final" and not 0 <= value <= MAX_T_FINAL:
        raise ConfigError(f"t_final must lie in [0, {MAX_T_FINAL:g}]")


def config_text(cfg: RunConfig) -> str:
    """Canonical text form; ``parse_config(config_text(c)) == c``."""
    out = [f"scheme = {cfg.scheme}", f"cfl = {cfg.cfl!r}"]
    out.append(f"re_h = {cfg.re_h!r}" if cfg.re_h is not None else f"nu = {cfg.nu!r}")
    out += [
        f"frame = {cfg.frame.kind}:{cfg.frame.epsilon!r}" if cfg.frame.kind != "identity" else "frame = identity",
        f"nx = {cfg.nx}",
        f"t_final = {cfg.t_final!r}",
        "snapshot_times = " + ", ".join(repr(t) for t in cfg.snapshot_times),
        f"c_kappa = {cfg.c_kappa!r}",
    ]
    if cfg.output_dir is not None:
        out.append(f"output_dir = {cfg.output_dir}")
    return "\n".join(out) + "\n"


# -- step resolution ---------------------------------------------------------------------

@dataclass(frozen=True)
class Resolution:
    h: float
    tau: float
    nu: float
    a: float
    nu_frame: float
    a_frame: float
    iterations: int = 0

    def as_dict(self) -> Dict[str, float]:
        return {k: getattr(self, k) for k in ("h", "tau", "nu", "a", "nu_frame", "a_frame", "iterations")}


def grid_for(nx: int) -> Grid1D:
    return Grid1D.spanning(DOMAIN[0], DOMAIN[1], nx)


def _max_initial(ref: ReferenceSolution, x: np.ndarray) -> float:
    return float(np.max(np.abs(ref.value(x, 0.0))))


def resolve_steps(cfg: RunConfig, tol: float = 1e-10, max_iter: int = 20) -> Resolution:
    g = grid_for(cfg.nx)
    h = g.h
    iterations = 0
    if cfg.nu is not None:
        nu = cfg.nu
    else:
        nu = h
        for iterations in range(1, max_iter + 1):
            new = _max_initial(exact_pulse(nu), g.x) * h / cfg.re_h
            done = abs(new - nu) <= tol * max(1.0, nu)
            nu = new
            if done:
                break
        else:
            raise ConfigError(f"viscosity fixed point did not converge in {max_iter} iterations; "
                              "give nu directly instead of re_h")
    a = _max_initial(exact_pulse(nu), g.x)
    tau = cfg.cfl * h / a
    active = ProblemSetup(exact_pulse(nu), cfg.frame).active_reference
    return Resolution(h, tau, nu, a, active.nu, _max_initial(active, g.x), iterations)


# -- error metric ----------------------------------------------------------------------------

def l2_error(f: Field, ref: ReferenceSolution, t: float, grid: Grid1D) -> float:
    """``sqrt(h * sum_interior (u_i - u_ref(x_i, t))^2)``."""
    s = grid.interior
    diff = f.values[s] - ref.value(grid.x_all[s], t)
    return float(np.sqrt(grid.h * np.dot(diff, diff)))


# -- integration loop ------------------------------------------------------------------------

@dataclass
class ErrorSeries:
    times: List[float] = field(default_factory=list)
    l2: List[float] = field(default_factory=list)
    stability_flags: List[str] = field(default_factory=list)

    def append(self, t: float, e: float, flag: str) -> None:
        self.times.append(t)
        self.l2.append(e)
        self.stability_flags.append(flag)

    def max_until(self, t_max: float) -> float:
        vals = [e for t, e in zip(self.times, self.l2) if t <= t_max + 1e-12]
        return max(vals) if vals else float("nan")


@dataclass(frozen=True)
class Snapshot:
    t: float
    x: np.ndarray
    u_num: np.ndarray
    u_exact: np.ndarray


@dataclass
class RunResult:
    config: RunConfig
    resolution: Resolution
    series: ErrorSeries
    snapshots: List[Snapshot]
    status: str = "complete"
    message: str = ""
    n_steps: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "complete"


def _schedule(t0: float, t1: float, tau: float, stops: Sequence[float]) -> List[float]:
    """Step end times from ``t0`` to ``t1`` with nominal ``tau`` landing exactly on ``stops``."""
    marks = sorted({s for s in stops if t0 < s < t1} | {t1})
    out: List[float] = []
    t = t0
    for m in marks:
        n = max(1, math.ceil((m - t) / tau - 1e-9))
        out += [t + (m - t) * k / n for k in range(1, n)] + [m]
        t = m
    return out if t1 > t0 else []


def integrate(scheme: str, grid: Grid1D, params: StepParams, ref: ReferenceSolution,
              f0: Field, times: Sequence[float],
              on_step: Optional[Callable[[int, Field], None]] = None) -> Field:
    """Step ``f0`` through ``times``; boundary data and forcing come from ``ref``."""

    def bc(xs, t):
        return ref.value(xs, t)

    f = f0
    for k, t_next in enumerate(times, start=1):
        p = params if abs((t_next - f.time) - params.tau) <= 1e-12 * params.tau else \
            replace(params, tau=t_next - f.time)
        f = step(scheme, f, p, grid, bc, ref.source)
        f.time = t_next
        if on_step is not None:
            on_step(k, f)
    return f


def run_experiment(cfg: RunConfig) -> RunResult:
    res = resolve_steps(cfg)
    g = grid_for(cfg.nx)
    setup = ProblemSetup(exact_pulse(res.nu), cfg.frame, t_final=cfg.t_final)
    f0, _ = build_problem(setup, g)
    ref = setup.active_reference
    params = StepParams(res.tau, ref.nu, cfg.cspec)
    sp = StabilityParams.from_physical(ref.nu, res.a_frame, g.h, res.tau)

    def flag(f: Field) -> str:
        if cfg.scheme in ("invariant", "high_order"):
            q = params if cfg.scheme == "invariant" else StepParams(params.tau, params.nu)
            return check_invariant_field(sp.S, sp.CFL, half_point_omega_tau(f, q, g)).verdict
        return check_classical(cfg.scheme, sp)

    series = ErrorSeries()
    snapshots: List[Snapshot] = []
    snap_set = set(cfg.snapshot_times)
    phys = g.physical

    def record(k: int, f: Field) -> None:
        series.append(f.time, l2_error(f, ref, f.time, g), flag(f))
        if any(abs(f.time - s) <= 1e-12 for s in snap_set):
            snapshots.append(Snapshot(f.time, g.x.copy(), f.values[phys].copy(),
                                      ref.value(g.x, f.time)))

    record(0, f0)
    times = _schedule(0.0, cfg.t_final, res.tau, cfg.snapshot_times)
    result = RunResult(cfg, res, series, snapshots, n_steps=len(times))
    try:
        integrate(cfg.scheme, g, params, ref, f0, times, record)
    except InstabilityError as exc:
        result.status, result.message = "unstable", str(exc)
        series.stability_flags.append(UNSTABLE)
        series.times.append(exc.time)
        series.l2.append(float("inf"))
    except ConvergenceError as exc:
        result.status, result.message = "solver_failed", str(exc)
    return result


# -- frame comparison --------------------------------------------------------------------------

COMPARISON_SCHEMES = ("ftcs", "lax_wendroff", "crank_nicolson", "high_order", "invariant")


def sensitivity_ratio(series_f1: ErrorSeries, series_f2: ErrorSeries, t_max: float) -> float:
    """``rho = max_t l2_F2 / max_t l2_F1`` over ``t <= t_max``."""
    return series_f2.max_until(t_max) / series_f1.max_until(t_max)


@dataclass(frozen=True)
class FrameComparison:
    re_h: float
    cfl: float
    frame: str
    t_window: float
    max_f1: Dict[str, float]
    max_f2: Dict[str, float]
    results: Dict[Tuple[str, str], RunResult] = field(default_factory=dict, compare=False, repr=False)

    @property
    def rho(self) -> Dict[str, float]:
        return {s: self.max_f2[s] / self.max_f1[s] for s in self.max_f1}


def _run_config(cfg: RunConfig) -> RunResult:
    return run_experiment(cfg)


def run_many(configs: Sequence[RunConfig], workers: Optional[int] = None) -> List[RunResult]:
    """Independent runs in parallel processes; order of results follows ``configs``."""
    if workers == 1 or len(configs) <= 1:
        return [run_experiment(c) for c in configs]
    workers = workers or min(len(configs), os.cpu_count() or 1)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_config, configs))


def frame_comparison(re_h: float, cfl: float, nx: int = 201, frame: str = "galilean:1",
                     t_window: float = 5.0, schemes: Sequence[str] = COMPARISON_SCHEMES,
                     c_kappa: float = -0.01, workers: Optional[int] = None) -> FrameComparison:
    ft = FrameTransform.parse(frame)
    configs = []
    for s in schemes:
        for fr in (FrameTransform(), ft):
            configs.append(RunConfig(s, cfl, re_h=re_h, frame=fr, nx=nx, t_final=t_window,
                                     snapshot_times=(), c_kappa=c_kappa))
    results = run_many(configs, workers)
    max_f1, max_f2, keyed = {}, {}, {}
    for cfg, r in zip(configs, results):
        which = "F1" if cfg.frame.is_identity else "F2"
        keyed[(cfg.scheme, which)] = r
        target = max_f1 if which == "F1" else max_f2
        target[cfg.scheme] = r.series.max_until(t_window) if r.ok else float("inf")
    return FrameComparison(re_h, cfl, str(ft), t_window, max_f1, max_f2, keyed)


# -- convergence studies -------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceSpec:
    """Refinement study on ``[0, 40]``: ``h`` halves per level, ``tau = ratio * h**p``.

    ``p`` is 1 for temporal probes and 2 for spatial ones. ``reference`` is ``wave``
    (exact smooth Burgers solution) or ``manufactured`` (forced field, needed when the
    scheme models ``F + (C u_x)_x`` with ``C != 0``).
    """

    scheme: str
    probe: str
    levels: int = 4
    nx0: int = 101
    t_start: float = 0.0
    duration: float = 1.0
    nu: float = 0.15
    ratio: float = 0.05
    kappa: float = 0.0
    reference: str = "wave"

    def __post_init__(self):
        if self.probe not in ("spatial", "temporal"):
            raise ValueError("probe must be 'spatial' or 'temporal'")
        if self.levels < 3:
            raise ValueError("levels must be >= 3")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")


def default_convergence_spec(scheme: str, probe: str, levels: int = 4) -> ConvergenceSpec:
    """Parameters chosen so the probed error term dominates at desk-scale grids.

    Spatial probes use ``tau = h^2 / 4``. Temporal probes use ``tau = h / 20`` except
    for the C = 0 high-order scheme, whose ``h^4`` term would otherwise mask ``tau^2``
    on coarse grids; there ``tau = h / 5`` with a smaller ``nu`` keeps ``S <= 0.4``.
    """
    if scheme == "invariant":
        return ConvergenceSpec(scheme, probe, levels, nu=0.15, ratio=0.05 if probe == "temporal" else 0.25,
                               kappa=-0.01, reference="manufactured", duration=0.5)
    if probe == "spatial":
        return ConvergenceSpec(scheme, probe, levels, nu=0.15, ratio=0.25)
    if scheme == "high_order":
        return ConvergenceSpec(scheme, probe, levels, nu=0.1, ratio=0.2)
    return ConvergenceSpec(scheme, probe, levels, nu=0.15, ratio=0.05)


@dataclass(frozen=True)
class ConvergenceRow:
    nx: int
    h: float
    tau: float
    error: float
    order: Optional[float]
    flagged: bool = False


def _viscosity_jet(kappa: float):
    def C(x, t, u, ux):
        return kappa * t * (t * u - x) ** 2 * ux * ux
    return C


def convergence_reference(spec: ConvergenceSpec) -> ReferenceSolution:
    if spec.reference == "wave":
        return cole_hopf_wave(spec.nu)
    if spec.reference == "manufactured":
        visc = _viscosity_jet(spec.kappa) if spec.kappa and spec.scheme == "invariant" else None
        return manufactured(spec.nu, Manufactured(), viscosity=visc)
    raise ValueError(f"unknown reference {spec.reference!r}")


def convergence_study(spec: ConvergenceSpec) -> List[ConvergenceRow]:
    ref = convergence_reference(spec)
    power = 1 if spec.probe == "temporal" else 2
    per_level = 2 ** power
    g0 = grid_for(spec.nx0)
    n0 = max(1, math.ceil(spec.duration / (spec.ratio * g0.h ** power) - 1e-9))
    cspec = CSpec(spec.kappa) if spec.scheme == "invariant" else CSpec.zero()
    rows: List[ConvergenceRow] = []
    for level in range(spec.levels):
        nx = (spec.nx0 - 1) * 2 ** level + 1
        g = grid_for(nx)
        n_steps = n0 * per_level ** level
        tau = spec.duration / n_steps
        f0 = Field(ref.value(g.x_all, spec.t_start), spec.t_start)
        times = [spec.t_start + spec.duration * k / n_steps for k in range(1, n_steps + 1)]
        try:
            f = integrate(spec.scheme, g, StepParams(tau, ref.nu, cspec), ref, f0, times)
            err = l2_error(f, ref, f.time, g)
        except (InstabilityError, ConvergenceError):
            err = float("inf")
        order = None
        flagged = False
        if rows:
            prev = rows[-1].error
            flagged = not err < prev
            order = math.log2(prev / err) if 0 < err < math.inf and prev < math.inf else None
        rows.append(ConvergenceRow(nx, g.h, tau, err, order, flagged))
    return rows


def format_convergence(rows: Sequence[ConvergenceRow]) -> str:
    lines = ["nx,h,tau,error,order,flagged"]
    for r in rows:
        order = "" if r.order is None else f"{r.order:.4f}"
        lines.append(f"{r.nx},{r.h:.17g},{r.tau:.17g},{r.error:.17g},{order},{int(r.flagged)}")
    return "\n".join(lines) + "\n"
