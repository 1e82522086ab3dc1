import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from invburgers import cli
from invburgers.harness import (ConfigError, ConvergenceSpec, ErrorSeries, RunConfig, _schedule,
                                config_text, convergence_study, format_convergence, grid_for,
                                l2_error, parse_config, resolve_steps, run_experiment,
                                sensitivity_ratio)
from invburgers.outputs import emit_outputs, error_csv, read_error_csv, svg_line_plot
from invburgers.problems import FrameTransform, exact_pulse
from invburgers.schemes import Field

SMALL = "scheme = {scheme}\ncfl = 0.2\nre_h = 2\nnx = 41\nt_final = 1\nsnapshot_times = 0.5\n"


@pytest.mark.parametrize("text, line, fragment", [
    ("scheme = ftcs\ncfl = 1\nre_h = 2\nbogus = 3\n", 4, "unknown key"),
    ("scheme = ftcs\ncfl = 1\ncfl = 2\nre_h = 2\n", 3, "twice"),
    ("scheme = ftcs\ncfl = abc\nre_h = 2\n", 2, "malformed"),
    ("scheme = ftcs\ncfl = 1\nre_h = 2\nnu = 0.1\n", 4, "mutually exclusive"),
    ("scheme = euler\n", 1, "unknown scheme"),
    ("scheme = ftcs\nthis line has no equals\n", 2, "key = value"),
    ("scheme = ftcs\ncfl = 1\nre_h = 2\nframe = warp:1\n", 4, "frame kind"),
    ("scheme = ftcs\ncfl = 1\nre_h = 2\nt_final = 30\n", 4, "t_final"),
])
def test_config_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert fragment in str(info.value)


def test_config_missing_keys():
    with pytest.raises(ConfigError, match="cfl"):
        parse_config("scheme = ftcs\nre_h = 2\n")
    with pytest.raises(ConfigError, match="re_h"):
        parse_config("scheme = ftcs\ncfl = 1\n")


@given(st.sampled_from(["ftcs", "lax_wendroff", "crank_nicolson", "high_order", "invariant"]),
       st.floats(0.01, 2.0), st.booleans(), st.floats(0.5, 5.0),
       st.sampled_from(["identity", "galilean:1", "dilatation3:1.5", "projective:0.01"]),
       st.integers(11, 500), st.floats(1.0, 20.0))
@settings(max_examples=60, deadline=None)
def test_config_round_trip(scheme, cfl, use_re, value, frame, nx, t_final):
    cfg = RunConfig(scheme, cfl, re_h=value if use_re else None, nu=None if use_re else value / 10,
                    frame=FrameTransform.parse(frame), nx=nx, t_final=t_final,
                    snapshot_times=(t_final / 2,), c_kappa=-0.02)
    assert parse_config(config_text(cfg)) == cfg


def test_resolve_steps_fixed_point():
    cfg = parse_config("scheme = ftcs\ncfl = 0.04\nre_h = 2\n")
    r = resolve_steps(cfg)
    g = grid_for(201)
    a = float(np.max(exact_pulse(r.nu).value(g.x, 0.0)))
    assert r.h == pytest.approx(0.2)
    assert r.nu == pytest.approx(a * r.h / 2, rel=1e-9)
    assert r.tau == pytest.approx(0.04 * r.h / a)
    f2 = resolve_steps(parse_config("scheme = ftcs\ncfl = 0.04\nre_h = 2\nframe = galilean:1\n"))
    assert (f2.h, f2.tau, f2.nu) == (r.h, r.tau, r.nu)
    assert f2.a_frame == pytest.approx(r.a + 1.0, rel=1e-6)


def test_schedule_hits_stops_and_end():
    times = _schedule(0.0, 1.0, 0.3, [0.5])
    assert 0.5 in times and times[-1] == 1.0
    assert all(b > a for a, b in zip(times, times[1:]))
    assert max(np.diff([0.0] + times)) <= 0.3 + 1e-12
    assert _schedule(0.0, 0.0, 0.1, []) == []


def test_l2_error_weights_and_zero():
    g = grid_for(41)
    ref = exact_pulse(0.5)
    f = Field(ref.value(g.x_all, 0.3), 0.3)
    assert l2_error(f, ref, 0.3, g) == 0.0
    f.values[g.interior] += 1.0
    assert l2_error(f, ref, 0.3, g) == pytest.approx(math.sqrt(g.h * (g.n_points - 2)))


def test_sensitivity_ratio_is_a_pure_function():
    a, b = ErrorSeries(), ErrorSeries()
    for t, e1, e2 in [(0.0, 0.0, 0.0), (1.0, 0.1, 0.3), (2.0, 0.2, 0.2), (6.0, 9.0, 9.0)]:
        a.append(t, e1, "stable")
        b.append(t, e2, "stable")
    assert sensitivity_ratio(a, b, 5.0) == pytest.approx(1.5)
    assert sensitivity_ratio(a, b, 5.0) == sensitivity_ratio(a, b, 5.0)


@pytest.mark.parametrize("scheme", ["ftcs", "crank_nicolson", "invariant"])
def test_short_run_and_outputs(tmp_path, scheme):
    cfg = parse_config(SMALL.format(scheme=scheme))
    r = run_experiment(cfg)
    assert r.ok and r.series.times[0] == 0.0 and r.series.times[-1] == pytest.approx(1.0)
    assert len(r.series.l2) == r.n_steps + 1
    assert [s.t for s in r.snapshots] == [0.5]
    paths = emit_outputs(r, str(tmp_path))
    names = sorted(p.rsplit("/", 1)[-1] for p in paths)
    assert names == ["config.txt", "error.csv", "error.svg", "run.json", "snapshot.svg", "snapshot_t0.5.csv"]
    times, l2 = read_error_csv(str(tmp_path / "error.csv"))
    assert times == r.series.times and l2 == r.series.l2
    head = json.loads((tmp_path / "run.json").read_text())
    assert head["status"] == "complete" and head["resolved"]["h"] == r.resolution.h
    assert parse_config((tmp_path / "config.txt").read_text()) == cfg
    for svg in ("error.svg", "snapshot.svg"):
        ET.parse(tmp_path / svg)
    snap = (tmp_path / "snapshot_t0.5.csv").read_text().splitlines()
    assert snap[0] == "x,u_num,u_exact" and len(snap) == 42


def test_outputs_are_deterministic(tmp_path):
    cfg = parse_config(SMALL.format(scheme="lax_wendroff"))
    emit_outputs(run_experiment(cfg), str(tmp_path / "a"))
    emit_outputs(run_experiment(cfg), str(tmp_path / "b"))
    for name in ("error.csv", "error.svg", "run.json", "snapshot.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_unstable_run_is_reported():
    cfg = parse_config("scheme = ftcs\ncfl = 1.5\nnu = 1.0\nnx = 81\nt_final = 20\nsnapshot_times = 1\n")
    r = run_experiment(cfg)
    assert r.status == "unstable"
    assert "unstable" in r.series.stability_flags
    assert math.isinf(r.series.l2[-1])


@given(values=st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=20))
@settings(max_examples=50, deadline=None)
def test_error_csv_round_trip(values, tmp_path_factory):
    path = tmp_path_factory.mktemp("csv") / "error.csv"
    times = [0.1 * k for k in range(len(values))]
    path.write_text(error_csv(times, values))
    assert read_error_csv(str(path)) == (times, values)


def test_svg_plot_handles_degenerate_data():
    ET.fromstring(svg_line_plot([("flat", [0, 1], [1, 1]), ("empty", [], [])], "t", "x", "y"))
    ET.fromstring(svg_line_plot([("log", [0, 1, 2], [1e-3, 1e-2, 0.0])], log_y=True))


def test_convergence_study_small():
    rows = convergence_study(ConvergenceSpec("lax_wendroff", "spatial", levels=3, nx0=41,
                                             duration=0.2, ratio=0.25))
    assert len(rows) == 3 and rows[0].order is None
    assert all(r.error < p.error for p, r in zip(rows, rows[1:]))
    assert format_convergence(rows).splitlines()[0] == "nx,h,tau,error,order,flagged"


# -- command line ------------------------------------------------------------------------------

def test_cli_run_and_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.cfg"
    good.write_text(SMALL.format(scheme="ftcs"))
    assert cli.main(["run", str(good), "--output-dir", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "error.csv").exists()
    bad = tmp_path / "bad.cfg"
    bad.write_text("scheme = ftcs\ncfl = -1\nre_h = 2\n")
    assert cli.main(["run", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "missing.cfg")]) == 1
    blow = tmp_path / "blow.cfg"
    blow.write_text("scheme = ftcs\ncfl = 1.5\nnu = 1.0\nnx = 81\nsnapshot_times = 1\n")
    assert cli.main(["run", str(blow), "--output-dir", str(tmp_path / "blow")]) == 2
    assert cli.main(["no-such-command"]) == 1


def test_cli_sweep(tmp_path):
    for s in ("ftcs", "high_order"):
        (tmp_path / f"{s}.cfg").write_text(SMALL.format(scheme=s))
    assert cli.main(["sweep", str(tmp_path), "--workers", "1"]) == 0
    assert (tmp_path / "ftcs" / "error.csv").exists()
    assert (tmp_path / "sweep_error.svg").exists()


def test_cli_symmetry_goldens(tmp_path, monkeypatch, capsys):
    assert cli.main(["check-symmetries"]) == 0
    assert cli.main(["check-symmetries", "--set", "fda4", "--target", "ftcs"]) == 0
    (tmp_path / "symmetry").mkdir()
    (tmp_path / "symmetry" / "burgers6__burgers.tsv").write_text("tampered\n")
    monkeypatch.setattr(cli, "GOLDEN_DIR", tmp_path)
    assert cli.main(["check-symmetries"]) == 3
    assert cli.main(["check-symmetries", "--target", "lw"]) == 3


def test_cli_modified_equation(tmp_path, monkeypatch, capsys):
    assert cli.main(["modified-equation", "--scheme", "ftcs", "--diff-literal"]) == 0
    out = capsys.readouterr().out
    assert "u_t" in out and "matches" in out
    (tmp_path / "modeq").mkdir()
    (tmp_path / "modeq" / "ftcs.txt").write_text("u_t + u*u_x\n")
    monkeypatch.setattr(cli, "GOLDEN_DIR", tmp_path)
    assert cli.main(["modified-equation", "--scheme", "ftcs", "--diff-literal"]) == 3


def test_cli_stability_check(capsys):
    assert cli.main(["stability-check", "--scheme", "ftcs", "--S", "0.3", "--cfl", "0.5"]) == 0
    assert cli.main(["stability-check", "--scheme", "ftcs", "--S", "0.7", "--cfl", "0.5"]) == 2
    assert cli.main(["stability-check", "--scheme", "invariant", "--nu", "0.5", "--a", "5",
                     "--h", "0.2", "--tau", "0.005"]) == 0
    assert "4S/3" in capsys.readouterr().out
    assert cli.main(["stability-check", "--scheme", "ftcs", "--S", "0.3"]) == 1


def test_cli_convergence(capsys):
    assert cli.main(["convergence", "--scheme", "lax_wendroff", "--probe", "spatial", "--levels", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4
