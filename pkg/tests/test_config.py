import textwrap

import pytest

from tsq.config import load_config, parse_config, sample_times
from tsq.errors import ConfigError

MINIMAL = """
[run]
scenario = renninger1960
[grid]
xmin = -80
xmax = 80
ymin = -80
ymax = 80
nx = 64
ny = 64
[source]
x = 0
y = 0
t = 0
[detector]
x = 0
y = -60
t = 28
"""


def with_lines(base, section, **kv):
    extra = "\n".join(f"{k} = {v}" for k, v in kv.items())
    return base.replace(f"[{section}]", f"[{section}]\n{extra}", 1)


def test_minimal_config_gets_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.scenario == "renninger1960"
    assert cfg.run.dt == 0.01
    assert sample_times(cfg) == (0, 7, 14, 21, 28)
    assert not cfg.diffraction
    assert cfg.run.emit_csv and cfg.run.emit_images


def test_comments_and_explicit_times():
    text = with_lines(MINIMAL, "run", sample_times="28, 0 14   # unordered")
    text = "# leading comment\n" + text
    assert sample_times(parse_config(text)) == (0, 14, 28)


@pytest.mark.parametrize("mutate, match", [
    (lambda s: s.replace("y = -60", "y = -90"), "detector"),
    (lambda s: s.replace("[source]\nx = 0", "[source]\nx = 100"), "source"),
    (lambda s: s.replace("t = 28", "t = -1"), "later"),
    (lambda s: s.replace("renninger1960", "renninger1961"), "unknown scenario"),
    (lambda s: s.replace("nx = 64", "nx = 64\nnz = 3"), "nz"),
    (lambda s: s + "\n[extra]\na = 1\n", "extra"),
    (lambda s: s.replace("[detector]", "[detectors]"), "detector"),
    (lambda s: s.replace("xmax = 80", "xmax = eighty"), "xmax"),
    (lambda s: s.replace("ny = 64", ""), "ymin, ymax and ny"),
    (lambda s: s.replace("x = 0\ny = 0", "y = 0"), "'x'"),
    (lambda s: s.replace("xmax = 80", "xmax = -90"), "xmax must exceed"),
    (lambda s: with_lines(s, "run", sample_times="0, 28"), "3 distinct"),
    (lambda s: with_lines(s, "run", sample_times="0, 14, 30"), "outside"),
    (lambda s: with_lines(s, "run", snapshots=2), "snapshots"),
    (lambda s: with_lines(s, "run", dt=0), "positive"),
    (lambda s: with_lines(s, "run", dt="inf"), "finite"),
    (lambda s: with_lines(s, "run", emit_csv="maybe"), "boolean"),
    (lambda s: "[run]\nscenario\n", "malformed"),
    (lambda s: "[grid]\nxmin = 0\n", "scenario"),
])
def test_invalid_configs_name_the_problem(mutate, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(mutate(MINIMAL))


OBSTACLE = MINIMAL + """
[obstacle]
radius = 30
theta_start = 0
theta_end = 90
"""


def test_diffraction_mode():
    cfg = parse_config(with_lines(OBSTACLE, "run", dt=0.05))
    assert cfg.diffraction
    assert cfg.obstacle.mode == "barrier"


@pytest.mark.parametrize("mutate, match", [
    (lambda s: s.replace("theta_end = 90", "theta_end = 10\ntheta_start = 20")
     .replace("theta_start = 0\n", ""), "theta_end must exceed"),
    (lambda s: s.replace("radius = 30", "radius = 30\nmode = absorber"), "barrier"),
    (lambda s: s.replace("radius = 30", "radius = 30\nmode = sponge"), "mode"),
    (lambda s: s.replace("radius = 30", "radius = -3"), "radius"),
    (lambda s: s.replace("radius = 30", "radius = 30\nouter_radius = 60"), "outer_radius"),
    (lambda s: with_lines(s, "run", sample_times="0, 7.01, 28"), "lattice"),
    (lambda s: s.replace("= 64", "= 1024"), "anti-aliasing"),
])
def test_obstacle_validation(mutate, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(mutate(with_lines(OBSTACLE, "run", dt=0.05)))


def test_angular_ensemble_requires_absorber():
    text = OBSTACLE.replace("renninger1960", "angular_ensemble")
    with pytest.raises(ConfigError, match="absorber"):
        parse_config(text)
    cfg = parse_config(text.replace("radius = 30", "radius = 30\nmode = absorber"))
    assert cfg.run.detectors == 64
    with pytest.raises(ConfigError, match="obstacle"):
        parse_config(MINIMAL.replace("renninger1960", "angular_ensemble"))


def test_detector_count_multiple_of_four():
    text = OBSTACLE.replace("renninger1960", "angular_ensemble").replace(
        "radius = 30", "radius = 30\nmode = absorber")
    with pytest.raises(ConfigError, match="multiple of 4"):
        parse_config(with_lines(text, "run", detectors=30))


MZI = """
[run]
scenario = renninger1953
[mzi]
block_upper = yes
"""


def test_mzi_defaults_and_paths():
    cfg = parse_config(MZI)
    assert cfg.mzi.arm == 400 and cfg.mzi.k == 0.4
    with pytest.raises(ConfigError, match="blocked"):
        parse_config(MZI + "path = S-B1-D3-M2-B2-D1\n")
    with pytest.raises(ConfigError, match="not a source-detector path"):
        parse_config(MZI + "path = S-B2-D1\n")
    # with the lower arm blocked the upper paths carry the handshake
    parse_config(MZI.replace("yes", "no") + "path = S-B1-M2-B2-D1\n")
    with pytest.raises(ConfigError, match="requires a \\[mzi\\]"):
        parse_config("[run]\nscenario = renninger1953\n")


def test_squarewell_grid():
    cfg = parse_config("[run]\nscenario = squarewell\n[grid]\nxmin = 0\nxmax = 2\nnx = 256\n")
    assert cfg.grid.dims == 1
    assert sample_times(cfg) == (0, 0.25, 0.5, 0.75, 1.0)
    with pytest.raises(ConfigError, match="1D"):
        parse_config("[run]\nscenario = squarewell\n[grid]\nxmin = 0\nxmax = 2\nnx = 8\n"
                     "ymin = 0\nymax = 1\nny = 8\n")
    with pytest.raises(ConfigError, match="xmin = 0"):
        parse_config("[run]\nscenario = squarewell\n[grid]\nxmin = 1\nxmax = 2\nnx = 8\n")


def test_load_config(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text(textwrap.dedent(MINIMAL))
    assert load_config(p).detector.y == -60
    with pytest.raises(OSError):
        load_config(tmp_path / "missing.ini")
