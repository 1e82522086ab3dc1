"""Command line interface.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical instability (or an
unstable verdict from ``stability-check``), 3 mismatch against committed goldens.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import diffalg as da
from .harness import (CONFIG_HELP, ConfigError, RunConfig, convergence_study,
                      default_convergence_spec, format_convergence, frame_comparison,
                      parse_config, run_experiment, run_many)
from .modeq import CATALOG_NAMES, catalog, closed_form_representation, differential_approximation
from .outputs import emit_comparison, emit_outputs
from .schemes import SCHEMES
from .stability import (UNSTABLE, StabilityParams, check, check_invariant)
from .symmetry import (GENERATOR_SETS, builtin_generators, burgers_polynomial, onshell_residual,
                       symmetry_records, symmetry_table)

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_MISMATCH = 0, 1, 2, 3

GOLDEN_DIR = Path(__file__).with_name("goldens")

TARGETS = {"burgers": None, "ftcs": "ftcs", "lw": "lax_wendroff", "cn": "crank_nicolson",
           "invariant": "invariant"}


# -- symmetry checks ------------------------------------------------------------------------

def target_polynomial(target: str):
    """The relation a generator set is tested against, with its ``(h, tau)`` truncation."""
    name = TARGETS[target]
    if name is None:
        return burgers_polynomial(), None
    entry = catalog(name)
    return differential_approximation(entry), (entry.weight_map, entry.max_order)


def symmetry_results(set_name: str, target: str) -> List[Tuple[str, str, da.DiffPoly]]:
    P, trunc = target_polynomial(target)
    return [(g.name, target, onshell_residual(g, P, trunc)) for g in builtin_generators(set_name)]


def symmetry_golden_path(set_name: str, target: str) -> Path:
    return GOLDEN_DIR / "symmetry" / f"{set_name}__{target}.tsv"


def modeq_golden_path(scheme: str) -> Path:
    return GOLDEN_DIR / "modeq" / f"{scheme}.txt"


def c_constraints_golden_path() -> Path:
    return GOLDEN_DIR / "c_constraints.tsv"


# -- subcommands --------------------------------------------------------------------------------

def _read_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _summary(label: str, r) -> str:
    res = r.resolution
    worst = max(r.series.l2) if r.series.l2 else float("nan")
    return (f"{label}: {r.config.scheme} frame={r.config.frame} h={res.h:.6g} tau={res.tau:.6g} "
            f"nu={res.nu:.6g} steps={r.n_steps} max_l2={worst:.6g} status={r.status}")


def cmd_run(args) -> int:
    cfg = _read_config(args.config)
    out = args.output_dir or cfg.output_dir or os.path.join("out", Path(args.config).stem)
    r = run_experiment(cfg)
    emit_outputs(r, out)
    print(_summary(args.config, r))
    if r.message:
        print(r.message, file=sys.stderr)
    return EXIT_OK if r.ok else EXIT_UNSTABLE


def cmd_sweep(args) -> int:
    paths = sorted(p for p in Path(args.directory).iterdir() if p.suffix in (".cfg", ".conf"))
    if not paths:
        raise ConfigError(f"no *.cfg files in {args.directory}")
    configs = [_read_config(str(p)) for p in paths]
    results = run_many(configs, args.workers)
    status = EXIT_OK
    by_label = {}
    for p, cfg, r in zip(paths, configs, results):
        out = cfg.output_dir or os.path.join(args.output_dir or args.directory, p.stem)
        emit_outputs(r, out)
        by_label[p.stem] = r
        print(_summary(p.name, r))
        if not r.ok:
            status = EXIT_UNSTABLE
    emit_comparison(by_label, args.output_dir or args.directory, "sweep")
    return status


def cmd_check_symmetries(args) -> int:
    sets = list(GENERATOR_SETS) if args.set == "all" else [args.set]
    targets = list(TARGETS) if args.target == "all" else [args.target]
    status = EXIT_OK
    for s in sets:
        for t in targets:
            results = symmetry_results(s, t)
            print(f"# {s} on {t}")
            print(symmetry_table(results), end="")
            records = symmetry_records(results)
            path = symmetry_golden_path(s, t)
            if args.update_goldens:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(records)
                continue
            if not path.exists():
                print(f"no golden at {path}", file=sys.stderr)
                status = EXIT_MISMATCH
            elif path.read_text() != records:
                print(f"MISMATCH against {path}", file=sys.stderr)
                status = EXIT_MISMATCH
    return status


def _parse_pair(text: str) -> Tuple[int, int]:
    a, b = (int(v) for v in text.split(","))
    return a, b


def cmd_modified_equation(args) -> int:
    entry = catalog(args.scheme)
    weights = _parse_pair(args.weights) if args.weights else None
    P = differential_approximation(entry, weights, args.max_order)
    print(da.to_text(P))
    if args.update_goldens:
        path = modeq_golden_path(args.scheme)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(da.to_text(closed_form_representation(args.scheme)) + "\n")
    if not args.diff_literal:
        return EXIT_OK
    path = modeq_golden_path(args.scheme)
    literal = da.from_text(path.read_text().strip())
    diff = P - literal
    if diff.is_zero():
        print(f"matches {path.name}")
        return EXIT_OK
    print(f"differs from {path.name} by: {da.to_text(diff)}", file=sys.stderr)
    return EXIT_MISMATCH


def cmd_stability_check(args) -> int:
    if args.S is not None and args.cfl is not None:
        sp = StabilityParams.from_numbers(args.S, args.cfl, args.omega_tau)
    elif None not in (args.nu, args.a, args.h, args.tau):
        sp = StabilityParams.from_physical(args.nu, args.a, args.h, args.tau, args.omega_tau)
    else:
        raise ConfigError("give --S and --cfl, or all of --nu --a --h --tau")
    verdict = check(args.scheme, sp)
    print(f"scheme={args.scheme} S={sp.S:.6g} CFL={sp.CFL:.6g} S*={sp.S_star:.6g} "
          f"omega_tau={sp.omega_tau:.6g} verdict={verdict}")
    if args.scheme in ("invariant", "high_order"):
        print(check_invariant(sp).describe())
    return EXIT_UNSTABLE if verdict == UNSTABLE else EXIT_OK


def cmd_convergence(args) -> int:
    spec = default_convergence_spec(args.scheme, args.probe, args.levels)
    rows = convergence_study(spec)
    print(format_convergence(rows), end="")
    return EXIT_OK


def cmd_frames(args) -> int:
    fc = frame_comparison(args.re_h, args.cfl, nx=args.nx, frame=args.frame,
                          t_window=args.t_window, workers=args.workers)
    print(f"re_h={fc.re_h:g} cfl={fc.cfl:g} frame={fc.frame} window=[0, {fc.t_window:g}]")
    print("scheme,max_l2_F1,max_l2_F2,rho")
    for s, rho in fc.rho.items():
        print(f"{s},{fc.max_f1[s]:.6g},{fc.max_f2[s]:.6g},{rho:.6g}")
    if args.output_dir:
        for which in ("F1", "F2"):
            runs = {s: r for (s, w), r in fc.results.items() if w == which}
            emit_comparison(runs, args.output_dir, f"frames_{which}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="invburgers", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="integrate one configuration", epilog=CONFIG_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    r.add_argument("config")
    r.add_argument("--output-dir")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run every *.cfg in a directory in parallel")
    s.add_argument("directory")
    s.add_argument("--output-dir")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check-symmetries", help="on-shell invariance residuals against goldens")
    c.add_argument("--set", default="burgers6", choices=list(GENERATOR_SETS) + ["all"])
    c.add_argument("--target", default="burgers", choices=list(TARGETS) + ["all"])
    c.add_argument("--update-goldens", action="store_true")
    c.set_defaults(func=cmd_check_symmetries)

    m = sub.add_parser("modified-equation", help="differential approximation of a scheme")
    m.add_argument("--scheme", required=True, choices=CATALOG_NAMES)
    m.add_argument("--weights", help="h,tau weights, e.g. 1,2")
    m.add_argument("--max-order", type=int)
    m.add_argument("--diff-literal", action="store_true",
                   help="compare with the committed closed-form representation")
    m.add_argument("--update-goldens", action="store_true")
    m.set_defaults(func=cmd_modified_equation)

    st = sub.add_parser("stability-check", help="linear stability verdict")
    st.add_argument("--scheme", required=True, choices=SCHEMES)
    st.add_argument("--S", type=float)
    st.add_argument("--cfl", type=float)
    st.add_argument("--nu", type=float)
    st.add_argument("--a", type=float)
    st.add_argument("--h", type=float)
    st.add_argument("--tau", type=float)
    st.add_argument("--omega-tau", type=float, default=0.0)
    st.set_defaults(func=cmd_stability_check)

    cv = sub.add_parser("convergence", help="grid refinement study")
    cv.add_argument("--scheme", required=True, choices=SCHEMES)
    cv.add_argument("--probe", required=True, choices=("spatial", "temporal"))
    cv.add_argument("--levels", type=int, default=4)
    cv.set_defaults(func=cmd_convergence)

    f = sub.add_parser("frames", help="error sensitivity to a change of frame")
    f.add_argument("--re-h", type=float, default=2.0)
    f.add_argument("--cfl", type=float, default=0.04)
    f.add_argument("--nx", type=int, default=201)
    f.add_argument("--frame", default="galilean:1")
    f.add_argument("--t-window", type=float, default=5.0)
    f.add_argument("--workers", type=int)
    f.add_argument("--output-dir")
    f.set_defaults(func=cmd_frames)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
