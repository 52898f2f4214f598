import hashlib
import math
import subprocess
import sys
from pathlib import Path

import pytest

from tsq import __version__
from tsq.cli import main
from tsq.config import parse_config
from tsq.field import Grid
from tsq.output import diverging_rgb, format_report
from tsq.propagator import Potential
from tsq.scenarios import (
    evolved_pair,
    run_scenario,
    same_circle_probabilities,
    simulate,
)
from tsq.states import detector_packet, sample_on_grid, source_packet
from tsq.transition import closed_form_stationary_amplitude

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL_1960 = """
[run]
scenario = renninger1960
output_dir = {out}
{extra}
[grid]
xmin = -144
xmax = 144
ymin = -174
ymax = 114
nx = 256
ny = 256
[source]
x = 0
y = 0
t = 0
[detector]
x = 0
y = -60
t = 28
"""


def small(out, extra=""):
    return parse_config(SMALL_1960.format(out=out, extra=extra))


def digest(folder):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(folder.iterdir())}


def test_all_channels_emit_expected_file_count(tmp_path):
    rep = run_scenario(small(tmp_path / "o"))
    names = sorted(p.name for p in (tmp_path / "o").iterdir())
    assert len([n for n in names if n.endswith(".csv")]) == 5
    assert len([n for n in names if n.endswith((".ppm", ".pgm"))]) == 15
    assert "report.txt" in names and len(names) == 21
    assert sorted(rep.files) == names


def test_flags_off_leaves_only_report(tmp_path):
    run_scenario(small(tmp_path / "o", "emit_csv = no\nemit_images = off"))
    assert [p.name for p in (tmp_path / "o").iterdir()] == ["report.txt"]


def test_rerun_is_byte_identical(tmp_path):
    run_scenario(small(tmp_path / "a"))
    run_scenario(small(tmp_path / "b"))
    assert digest(tmp_path / "a") == digest(tmp_path / "b")


def test_report_contents(tmp_path):
    rep = run_scenario(small(tmp_path / "o"))
    text = (tmp_path / "o" / "report.txt").read_text()
    lines = dict(line.split(" = ", 1) for line in text.splitlines())
    assert lines["scenario"] == "renninger1960"
    assert float(lines["P_s"]) == pytest.approx(math.exp(-18) / 50, rel=1e-9)
    assert lines["snapshot_times"] == "0,7,14,21,28"
    assert "wall_time" not in lines
    assert rep.wall_time > 0
    assert lines["files"].split(",")[-1] == "report.txt"
    assert "\r" not in text


def test_csv_and_image_format(tmp_path):
    run_scenario(small(tmp_path / "o", "emit_stride = 8"))
    csv = (tmp_path / "o" / "rho_000.csv").read_bytes().decode()
    rows = csv.splitlines()
    assert rows[0] == "x,y,re_rho,im_rho"
    assert len(rows) == 1 + 32 * 32
    x0, y0, _, _ = rows[1].split(",")
    x1, y1, _, _ = rows[2].split(",")
    assert float(y0) == float(y1) and float(x1) > float(x0)
    ppm = (tmp_path / "o" / "rho_002_re.ppm").read_bytes()
    assert ppm.startswith(b"P6\n32 32\n255\n") and len(ppm) == 13 + 32 * 32 * 3
    pgm = (tmp_path / "o" / "rho_002_abs.pgm").read_bytes()
    assert pgm.startswith(b"P5\n32 32\n255\n") and len(pgm) == 13 + 32 * 32


def test_diverging_map():
    import numpy as np

    rgb = diverging_rgb(np.array([1.0, 0.0, -1.0, 0.5, -0.5]))
    assert rgb.tolist() == [[255, 0, 0], [255, 255, 255], [0, 0, 255],
                            [255, 128, 128], [128, 128, 255]]


def test_format_report():
    text = format_report({"a": 1 / 3, "b": None, "c": {"x": 2.0}, "d": [1.5, 2.5], "e": True})
    assert text == "a = 0.333333333333\nc.x = 2\nd = 1.5,2.5\ne = true\n"


def test_numeric_pair_matches_analytic_without_obstacle():
    g = Grid.square(-80, 80, 256)
    psi, phi = source_packet(), detector_packet()
    rec, snaps = evolved_pair(sample_on_grid(psi, g, 0), sample_on_grid(phi, g, 28),
                              Potential.zero(g), 0.0, 28.0, 0.05, [0, 7, 14, 21, 28])
    exact = abs(closed_form_stationary_amplitude(psi.anchor, phi.anchor)) ** 2
    assert rec.probability == pytest.approx(exact, rel=1e-5)
    assert [t for t, _ in snaps] == [0, 7, 14, 21, 28]


def test_rotating_detector_leaves_probability_unchanged():
    cfg = parse_config((CONFIGS / "angular_ensemble.ini").read_text())
    g = Grid.square(-80, 80, 256)
    p = same_circle_probabilities(cfg, g, 12, [0.0, 14.0, 28.0])
    assert (p.max() - p.min()) / p.mean() < 1e-9


def test_squarewell_scenario():
    rep, snaps = simulate(parse_config((CONFIGS / "squarewell.ini").read_text()))
    assert rep.P_s == pytest.approx(1, abs=1e-9)
    assert rep.metrics["cross_A_s_abs"] < 1e-9
    assert rep.metrics["density_phase_error"] < 1e-12
    assert rep.continuity_residual_max < 1e-6
    assert len(snaps) == 5


def test_mzi_scenario():
    rep, snaps = simulate(parse_config((CONFIGS / "renninger1953.ini").read_text()))
    assert rep.detector_probabilities == pytest.approx({"D1": 0.25, "D2": 0.25, "D3": 0.5})
    assert rep.metrics["calibration_D1"] == pytest.approx(1)
    assert rep.open_paths == ["S-B1-M1-B2-D1", "S-B1-M1-B2-D2"]
    assert len(snaps) == 6


def test_cli_version(capsys):
    assert main(["version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_cli_validate(tmp_path, capsys):
    assert main(["validate", str(CONFIGS / "renninger1953.ini")]) == 0
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\nscenario = nope\n")
    assert main(["validate", str(bad)]) == 2
    assert "nope" in capsys.readouterr().err


def test_cli_run_and_exit_codes(tmp_path, capsys):
    cfg = CONFIGS / "renninger1953.ini"
    assert main(["run", str(cfg), "-o", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "report.txt").exists()
    assert "P(D3) = 0.5" in capsys.readouterr().out

    # output path occupied by a regular file
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", str(cfg), "-o", str(blocker)]) == 4
    assert main(["run", str(tmp_path / "missing.ini")]) == 4

    # grid too narrow for the spreading packets: the density reaches the edge
    text = SMALL_1960.format(out=tmp_path / "t", extra="").replace(
        "xmin = -144\nxmax = 144", "xmin = -20\nxmax = 20")
    narrow = tmp_path / "narrow.ini"
    narrow.write_text(text)
    assert main(["run", str(narrow)]) == 3
    assert "boundary" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "tsq", "version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("tsq ")
