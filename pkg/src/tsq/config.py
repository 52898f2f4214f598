"""INI-style scenario configuration.

Sections: [grid] [source] [detector] [obstacle] [mzi] [run].  ``scenario``
lives in [run].  Angles are given in degrees.  Unknown sections and keys are
rejected so typos cannot silently fall back to defaults.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError

SCENARIOS = ("renninger1960", "renninger1953", "squarewell", "angular_ensemble")


@dataclass(frozen=True)
class GridBlock:
    xmin: float
    xmax: float
    nx: int
    ymin: Optional[float] = None
    ymax: Optional[float] = None
    ny: Optional[int] = None

    @property
    def dims(self) -> int:
        return 1 if self.ny is None else 2

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and (
            self.dims == 1 or self.ymin <= y <= self.ymax)


@dataclass(frozen=True)
class EventBlock:
    x: float
    y: float
    t: float


@dataclass(frozen=True)
class ObstacleBlock:
    radius: float = 30.0
    theta_start: float = 0.0
    theta_end: float = 90.0
    thickness: Optional[float] = None
    mode: str = "barrier"
    strength: Optional[float] = None
    outer_radius: Optional[float] = None
    outer_thickness: float = 24.0
    outer_strength: float = 0.5


@dataclass(frozen=True)
class MziBlock:
    arm: float = 400.0
    lead: float = 200.0
    block_upper: bool = True
    k: float = 0.4
    width: float = math.sqrt(5000.0)
    path: str = "S-B1-M1-B2-D2"
    frames: int = 6


@dataclass(frozen=True)
class RunBlock:
    scenario: str
    sample_times: Optional[tuple] = None
    snapshots: int = 5
    dt: float = 0.01
    continuity_dt: float = 1e-3
    output_dir: str = "out"
    emit_csv: bool = True
    emit_images: bool = True
    emit_stride: Optional[int] = None
    detectors: int = 64
    absorb_time: float = 200.0
    absorb_dt: float = 0.05


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    run: RunBlock
    grid: Optional[GridBlock] = None
    source: Optional[EventBlock] = None
    detector: Optional[EventBlock] = None
    obstacle: Optional[ObstacleBlock] = None
    mzi: Optional[MziBlock] = None

    @property
    def diffraction(self) -> bool:
        return self.scenario == "renninger1960" and self.obstacle is not None


def _float(sec: str, key: str, raw: str) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: expected a number, got {raw!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"[{sec}] {key}: value must be finite")
    return v


def _int(sec: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: expected an integer, got {raw!r}") from None


def _bool(sec: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{sec}] {key}: expected a boolean, got {raw!r}")


def _floats(sec: str, key: str, raw: str) -> tuple:
    parts = [p for p in raw.replace(",", " ").split() if p]
    if not parts:
        raise ConfigError(f"[{sec}] {key}: empty list")
    return tuple(_float(sec, key, p) for p in parts)


_SCHEMA = {
    "grid": {"xmin": _float, "xmax": _float, "ymin": _float, "ymax": _float,
             "nx": _int, "ny": _int},
    "source": {"x": _float, "y": _float, "t": _float},
    "detector": {"x": _float, "y": _float, "t": _float},
    "obstacle": {"radius": _float, "theta_start": _float, "theta_end": _float,
                 "thickness": _float, "mode": str, "strength": _float,
                 "outer_radius": _float, "outer_thickness": _float,
                 "outer_strength": _float},
    "mzi": {"arm": _float, "lead": _float, "block_upper": _bool, "k": _float,
            "width": _float, "path": str, "frames": _int},
    "run": {"scenario": str, "sample_times": _floats, "snapshots": _int, "dt": _float,
            "continuity_dt": _float, "output_dir": str, "emit_csv": _bool,
            "emit_images": _bool, "emit_stride": _int, "detectors": _int,
            "absorb_time": _float, "absorb_dt": _float},
}

_REQUIRED = {
    "renninger1960": ("grid", "source", "detector"),
    "renninger1953": ("mzi",),
    "squarewell": ("grid",),
    "angular_ensemble": ("grid", "source", "detector", "obstacle"),
}


def _section(parser, name: str) -> Optional[dict]:
    if not parser.has_section(name):
        return None
    out = {}
    schema = _SCHEMA[name]
    for key, raw in parser.items(name):
        if key not in schema:
            raise ConfigError(f"[{name}] unknown key {key!r}")
        conv = schema[key]
        out[key] = raw.strip() if conv is str else conv(name, key, raw)
    return out


def _need(d: dict, sec: str, *keys):
    for k in keys:
        if k not in d:
            raise ConfigError(f"[{sec}] missing required key {k!r}")


def parse_config(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",),
        delimiters=("=",), default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for sec in parser.sections():
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")

    run_d = _section(parser, "run")
    if run_d is None or "scenario" not in run_d:
        raise ConfigError("[run] missing required key 'scenario'")
    scenario = run_d["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r} (expected one of {', '.join(SCENARIOS)})")
    for sec in _REQUIRED[scenario]:
        if not parser.has_section(sec):
            raise ConfigError(f"scenario {scenario} requires a [{sec}] section")

    grid = None
    g = _section(parser, "grid")
    if g is not None:
        _need(g, "grid", "xmin", "xmax", "nx")
        two_d = [k in g for k in ("ymin", "ymax", "ny")]
        if any(two_d) and not all(two_d):
            raise ConfigError("[grid] ymin, ymax and ny must be given together")
        if not g["xmax"] > g["xmin"]:
            raise ConfigError("[grid] xmax must exceed xmin")
        if g["nx"] < 2:
            raise ConfigError("[grid] nx must be >= 2")
        if all(two_d):
            if not g["ymax"] > g["ymin"]:
                raise ConfigError("[grid] ymax must exceed ymin")
            if g["ny"] < 2:
                raise ConfigError("[grid] ny must be >= 2")
        grid = GridBlock(**g)

    events = {}
    for name in ("source", "detector"):
        e = _section(parser, name)
        if e is not None:
            _need(e, name, "x", "y", "t")
            events[name] = EventBlock(**e)

    obstacle = None
    o = _section(parser, "obstacle")
    if o is not None:
        obstacle = ObstacleBlock(**o)
        if obstacle.mode not in ("barrier", "absorber"):
            raise ConfigError(f"[obstacle] mode must be barrier or absorber, got {obstacle.mode!r}")
        if not obstacle.radius > 0:
            raise ConfigError("[obstacle] radius must be positive")
        if not 0 <= obstacle.theta_start < 360 or not obstacle.theta_end <= 360:
            raise ConfigError("[obstacle] angles must lie within [0, 360] degrees")
        if not obstacle.theta_end > obstacle.theta_start:
            raise ConfigError("[obstacle] theta_end must exceed theta_start")
        if obstacle.thickness is not None and not obstacle.thickness > 0:
            raise ConfigError("[obstacle] thickness must be positive")
        if obstacle.strength is not None and not obstacle.strength > 0:
            raise ConfigError("[obstacle] strength must be positive")

    mzi = None
    m = _section(parser, "mzi")
    if m is not None:
        mzi = MziBlock(**m)
        if not (mzi.arm > 0 and mzi.lead > 0 and mzi.k > 0 and mzi.width > 0):
            raise ConfigError("[mzi] arm, lead, k and width must be positive")
        if mzi.frames < 2:
            raise ConfigError("[mzi] frames must be >= 2")

    run = RunBlock(**run_d)
    if not run.dt > 0 or not run.continuity_dt > 0 or not run.absorb_dt > 0:
        raise ConfigError("[run] time steps must be positive")
    if run.snapshots < 3:
        raise ConfigError("[run] snapshots must be >= 3")
    if run.emit_stride is not None and run.emit_stride < 1:
        raise ConfigError("[run] emit_stride must be >= 1")
    if run.detectors < 4 or run.detectors % 4:
        raise ConfigError("[run] detectors must be a positive multiple of 4")

    cfg = ScenarioConfig(scenario, run, grid, events.get("source"), events.get("detector"),
                         obstacle, mzi)
    _validate_scenario(cfg)
    return cfg


def _validate_scenario(cfg: ScenarioConfig) -> None:
    sc = cfg.scenario
    if sc in ("renninger1960", "angular_ensemble"):
        if cfg.grid.dims != 2:
            raise ConfigError(f"scenario {sc} needs a 2D [grid]")
        for name in ("source", "detector"):
            ev = getattr(cfg, name)
            if not cfg.grid.contains(ev.x, ev.y):
                raise ConfigError(f"{name} ({ev.x}, {ev.y}) lies outside the grid")
        if not cfg.detector.t > cfg.source.t:
            raise ConfigError("detector time must be later than source time")
        times = cfg.run.sample_times
        if times is not None:
            if len(set(times)) < 3:
                raise ConfigError("[run] sample_times needs at least 3 distinct times")
            for t in times:
                if not cfg.source.t <= t <= cfg.detector.t:
                    raise ConfigError(f"[run] sample time {t} outside the source-detector window")
    if sc == "renninger1960" and cfg.obstacle is not None:
        if cfg.obstacle.mode != "barrier":
            raise ConfigError(
                "[obstacle] renninger1960 needs mode = barrier: both waves must see the "
                "same real potential for the amplitude to be conserved")
        if cfg.obstacle.outer_radius is not None:
            raise ConfigError("[obstacle] outer_radius is only used by angular_ensemble")
        span = cfg.detector.t - cfg.source.t
        for t in sample_times(cfg):
            n = (t - cfg.source.t) / cfg.run.dt
            if abs(n - round(n)) > 1e-6:
                raise ConfigError(f"[run] sample time {t} is not on the dt={cfg.run.dt} lattice")
        n = span / cfg.run.dt
        if abs(n - round(n)) > 1e-6:
            raise ConfigError("[run] detector-source interval must be a multiple of dt")
        _check_dt(cfg, cfg.run.dt)
    if sc == "angular_ensemble":
        if cfg.obstacle.mode != "absorber":
            raise ConfigError("[obstacle] angular_ensemble needs mode = absorber")
        _check_dt(cfg, cfg.run.absorb_dt)
    if sc == "renninger1953":
        from .interferometer import handshake_paths, mach_zehnder

        m = cfg.mzi
        graph = mach_zehnder(m.arm, m.lead, block_upper=m.block_upper,
                             block_lower=not m.block_upper, k=m.k)
        wanted = tuple(cfg.mzi.path.split("-"))
        match = [p for p in handshake_paths(graph) if p.nodes == wanted]
        if not match:
            raise ConfigError(f"[mzi] path {cfg.mzi.path!r} is not a source-detector path")
        if not match[0].open:
            raise ConfigError(f"[mzi] path {cfg.mzi.path!r} is blocked")
    if sc == "squarewell":
        if cfg.grid.dims != 1:
            raise ConfigError("squarewell needs a 1D [grid] (omit ymin, ymax, ny)")
        if cfg.grid.xmin != 0:
            raise ConfigError("[grid] squarewell well must start at xmin = 0")


def _check_dt(cfg: ScenarioConfig, dt: float) -> None:
    g = cfg.grid
    k2 = (math.pi * g.nx / (g.xmax - g.xmin)) ** 2 + (math.pi * g.ny / (g.ymax - g.ymin)) ** 2
    if not dt * k2 / 2 < math.pi:
        raise ConfigError(f"[run] dt = {dt} violates the anti-aliasing bound for this grid")


def sample_times(cfg: ScenarioConfig) -> tuple:
    if cfg.run.sample_times is not None:
        return tuple(sorted(cfg.run.sample_times))
    if cfg.scenario == "squarewell":
        t0, t1 = 0.0, 1.0
    else:
        t0, t1 = cfg.source.t, cfg.detector.t
    n = cfg.run.snapshots
    return tuple(t0 + (t1 - t0) * j / (n - 1) for j in range(n))


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
