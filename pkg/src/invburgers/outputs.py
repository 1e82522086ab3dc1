"""CSV, JSON and plain-SVG emission for runs and comparisons.

Everything written here is a pure function of the in-memory results: no clocks,
no randomness, floats printed with 17 significant digits.
"""

from __future__ import annotations

import json
import math
import os
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .harness import RunResult, config_text

Line = Tuple[str, Sequence[float], Sequence[float]]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
MAX_POLYLINE_POINTS = 2000


def _g(v: float) -> str:
    return f"{v:.17g}"


def snapshot_id(t: float) -> str:
    return f"{t:g}"


def error_csv(times: Sequence[float], l2: Sequence[float]) -> str:
    return "t,l2\n" + "".join(f"{_g(t)},{_g(e)}\n" for t, e in zip(times, l2))


def read_error_csv(path: str) -> Tuple[List[float], List[float]]:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "t,l2":
            raise ValueError(f"{path}: unexpected header {header!r}")
        times, l2 = [], []
        for line in fh:
            t, e = line.strip().split(",")
            times.append(float(t))
            l2.append(float(e))
    return times, l2


def snapshot_csv(x, u_num, u_exact) -> str:
    rows = "".join(f"{_g(a)},{_g(b)},{_g(c)}\n" for a, b, c in zip(x, u_num, u_exact))
    return "x,u_num,u_exact\n" + rows


def run_header(result: RunResult) -> Dict[str, object]:
    flags = result.series.stability_flags
    first_bad = next((t for t, f in zip(result.series.times, flags) if f == "unstable"), None)
    return {
        "config": config_text(result.config),
        "scheme": result.config.scheme,
        "frame": str(result.config.frame),
        "resolved": result.resolution.as_dict(),
        "status": result.status,
        "message": result.message,
        "n_steps": result.n_steps,
        "stability": {
            "steps_flagged_unstable": sum(f == "unstable" for f in flags),
            "first_flagged_time": first_bad,
        },
        "max_l2": max(result.series.l2) if result.series.l2 else None,
        "snapshots": [snapshot_id(s.t) for s in result.snapshots],
    }


# -- SVG --------------------------------------------------------------------------------------

def _thin(xs: Sequence[float], ys: Sequence[float]) -> Tuple[List[float], List[float]]:
    n = len(xs)
    if n <= MAX_POLYLINE_POINTS:
        return list(xs), list(ys)
    stride = math.ceil(n / MAX_POLYLINE_POINTS)
    idx = list(range(0, n, stride))
    if idx[-1] != n - 1:
        idx.append(n - 1)
    return [xs[i] for i in idx], [ys[i] for i in idx]


def _ticks(lo: float, hi: float, n: int = 5) -> List[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def svg_line_plot(lines: Sequence[Line], title: str = "", xlabel: str = "", ylabel: str = "",
                  log_y: bool = False, width: int = 640, height: int = 400) -> str:
    """Minimal line chart: axes, five ticks per axis, one polyline per entry, legend."""
    ml, mr, mt, mb = 70, 150, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    data = []
    for label, xs, ys in lines:
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y) and (not log_y or y > 0)]
        data.append((label, pts))
    all_pts = [p for _, pts in data for p in pts] or [(0.0, 0.0), (1.0, 1.0)]
    fy = (lambda v: math.log10(v)) if log_y else (lambda v: v)
    x0, x1 = min(p[0] for p in all_pts), max(p[0] for p in all_pts)
    y0, y1 = min(fy(p[1]) for p in all_pts), max(fy(p[1]) for p in all_pts)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (fy(v) - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{ml + pw / 2:.1f}" y="18" text-anchor="middle" font-size="13">{_esc(title)}</text>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for v in _ticks(x0, x1):
        X = sx(v)
        out.append(f'<line x1="{X:.2f}" y1="{mt + ph}" x2="{X:.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{mt + ph + 17}" text-anchor="middle">{v:.4g}</text>')
    for v in _ticks(y0, y1):
        Y = mt + ph - (v - y0) / (y1 - y0) * ph
        label = f"1e{v:.2g}" if log_y else f"{v:.4g}"
        out.append(f'<line x1="{ml - 5}" y1="{Y:.2f}" x2="{ml}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{Y + 4:.2f}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {mt + ph / 2:.1f})">{_esc(ylabel)}</text>')
    for k, (label, pts) in enumerate(data):
        color = _COLORS[k % len(_COLORS)]
        xs, ys = _thin([p[0] for p in pts], [p[1] for p in pts])
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = mt + 12 + 16 * k
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 35}" y="{ly + 4}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# -- writers -------------------------------------------------------------------------------------

def _write(path: str, text: str) -> str:
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def emit_outputs(result: RunResult, output_dir: str) -> List[str]:
    """``error.csv``, ``error.svg``, ``run.json``, ``config.txt`` and per-snapshot files."""
    try:
        os.makedirs(output_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {output_dir}: {exc.strerror}") from exc
    s = result.series
    label = f"{result.config.scheme} ({result.config.frame})"
    paths = [
        _write(os.path.join(output_dir, "error.csv"), error_csv(s.times, s.l2)),
        _write(os.path.join(output_dir, "error.svg"),
               svg_line_plot([(label, s.times, s.l2)], "L2 error", "t", "l2")),
        _write(os.path.join(output_dir, "config.txt"), config_text(result.config)),
        _write(os.path.join(output_dir, "run.json"),
               json.dumps(run_header(result), indent=2, sort_keys=True) + "\n"),
    ]
    if result.snapshots:
        lines: List[Line] = []
        for snap in result.snapshots:
            sid = snapshot_id(snap.t)
            paths.append(_write(os.path.join(output_dir, f"snapshot_t{sid}.csv"),
                                snapshot_csv(snap.x, snap.u_num, snap.u_exact)))
            lines.append((f"numerical t={sid}", snap.x, snap.u_num))
            lines.append((f"exact t={sid}", snap.x, snap.u_exact))
        paths.append(_write(os.path.join(output_dir, "snapshot.svg"),
                            svg_line_plot(lines, f"{label} snapshots", "x", "u")))
    return paths


def emit_comparison(results: Mapping[str, RunResult], output_dir: str, name: str = "comparison",
                    t_max: Optional[float] = None) -> List[str]:
    """One error plot (and one snapshot plot when available) with a polyline per run."""
    os.makedirs(output_dir, exist_ok=True)
    err_lines: List[Line] = []
    snap_lines: List[Line] = []
    for label, r in results.items():
        pts = [(t, e) for t, e in zip(r.series.times, r.series.l2) if t_max is None or t <= t_max + 1e-12]
        err_lines.append((label, [p[0] for p in pts], [p[1] for p in pts]))
        if r.snapshots:
            snap = r.snapshots[0]
            if not snap_lines:
                snap_lines.append(("exact", snap.x, snap.u_exact))
            snap_lines.append((label, snap.x, snap.u_num))
    paths = [_write(os.path.join(output_dir, f"{name}_error.svg"),
                    svg_line_plot(err_lines, f"{name}: L2 error", "t", "l2"))]
    if snap_lines:
        paths.append(_write(os.path.join(output_dir, f"{name}_snapshot.svg"),
                            svg_line_plot(snap_lines, f"{name}: snapshot", "x", "u")))
    return paths
