"""Scenario runners: each turns a validated config into a RunReport plus snapshots."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional

import numpy as np

from .config import ScenarioConfig, sample_times
from .errors import NumericError
from .field import ComplexField, Grid, boundary_max
from .interferometer import handshake_paths, mach_zehnder, path_density_snapshots, propagate_modes
from .output import emit_outputs
from .propagator import (
    ABSORBER,
    BARRIER,
    EvolutionParams,
    Potential,
    arc_mask,
    build_arc_potential,
    evolve,
    evolve_with_absorption,
)
from .states import (
    Direction,
    SquareWellMode,
    detector_packet,
    sample_on_grid,
    source_packet,
)
from .transition import (
    TransitionRecord,
    amplitude_density,
    closed_form_stationary_amplitude,
    continuity_residual,
    record_from_fields,
    transition_amplitude,
)

DEFAULT_BARRIER_STRENGTH = 1e3
DEFAULT_ABSORBER_THICKNESS = 16.0
DEFAULT_ABSORBER_STRENGTH = 0.5


@dataclass
class RunReport:
    scenario: str
    A_s_re: Optional[float] = None
    A_s_im: Optional[float] = None
    P_s: Optional[float] = None
    drift: Optional[float] = None
    continuity_residual_max: Optional[float] = None
    detector_probabilities: dict = field(default_factory=dict)
    absorbed_fraction: Optional[float] = None
    snapshot_times: list = field(default_factory=list)
    open_paths: list = field(default_factory=list)
    closed_paths: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    wall_time: float = 0.0
    files: list = field(default_factory=list)

    def set_amplitude(self, rec: TransitionRecord) -> None:
        self.A_s_re = rec.amplitude.real
        self.A_s_im = rec.amplitude.imag
        self.P_s = rec.probability
        self.drift = rec.drift
        self.metrics["relative_drift"] = rec.relative_drift

    def check_finite(self) -> None:
        values = [self.A_s_re, self.A_s_im, self.P_s, self.drift, self.continuity_residual_max,
                  self.absorbed_fraction, self.wall_time, *self.snapshot_times,
                  *self.detector_probabilities.values()]
        values += [v for v in self.metrics.values() if isinstance(v, float)]
        for v in values:
            if v is not None and not math.isfinite(v):
                raise NumericError(f"non-finite value in {self.scenario} report")

    def report_fields(self) -> dict:
        """Everything except wall time, which would break byte-identical reruns."""
        out = {k: v for k, v in self.__dict__.items() if k != "wall_time"}
        return {k: v for k, v in out.items() if v not in (None, [], {})}


def _grid(cfg: ScenarioConfig) -> Grid:
    g = cfg.grid
    return Grid(g.xmin, g.xmax, g.nx, g.ymin, g.ymax, g.ny)


def _events(cfg: ScenarioConfig):
    s, d = cfg.source, cfg.detector
    return source_packet(s.x, s.y, s.t), detector_packet(d.x, d.y, d.t)


def _check_snapshots(snaps) -> None:
    for t, f in snaps:
        if not np.all(np.isfinite(f.values)):
            raise NumericError(f"non-finite transition density at t={t:g}")


def run_renninger1960(cfg: ScenarioConfig):
    if cfg.diffraction:
        return run_diffraction(cfg)
    grid = _grid(cfg)
    psi, phi = _events(cfg)
    times = sample_times(cfg)
    rec = transition_amplitude(psi, phi, grid, times)
    report = RunReport(cfg.scenario)
    report.set_amplitude(rec)
    report.continuity_residual_max = max(
        continuity_residual(psi, phi, grid, t, cfg.run.continuity_dt) for t in times)
    exact = closed_form_stationary_amplitude(psi.anchor, phi.anchor)
    report.metrics["closed_form_P_s"] = abs(exact) ** 2
    report.metrics["P_s_relative_error"] = abs(rec.probability / abs(exact) ** 2 - 1)
    snaps = [(t, amplitude_density(sample_on_grid(psi, grid, t), sample_on_grid(phi, grid, t)))
             for t in times]
    return report, snaps


def evolved_pair(psi0: ComplexField, phi_f: ComplexField, pot: Potential, t_i: float,
                 t_f: float, dt: float, times) -> tuple:
    """Evolve psi forward from t_i and phi* backward from t_f; rho_s at ``times``.

    All times must sit on the dt lattice starting at t_i.
    """
    total = int(round((t_f - t_i) / dt))
    idx = [int(round((t - t_i) / dt)) for t in times]
    stride = reduce(math.gcd, [i for i in idx if i] + [total]) or total
    fwd = evolve(psi0, pot, EvolutionParams(dt, total, Direction.RETARDED, stride, t_i))
    bwd = evolve(phi_f, pot, EvolutionParams(dt, total, Direction.ADVANCED, stride, t_f))
    psi_at = {round(i * stride): f for i, (_, f) in enumerate(fwd)}
    phi_at = {total - round(i * stride): f for i, (_, f) in enumerate(bwd)}
    triples = [(t, psi_at[n], phi_at[n]) for t, n in zip(times, idx)]
    rec = record_from_fields(triples)
    snaps = [(t, amplitude_density(p, q)) for t, p, q in triples]
    return rec, snaps


def run_diffraction(cfg: ScenarioConfig):
    grid = _grid(cfg)
    psi, phi = _events(cfg)
    ob = cfg.obstacle
    w = ob.thickness or 4 * max(grid.dx, grid.dy)
    pot = build_arc_potential(grid, ob.radius, math.radians(ob.theta_start),
                              math.radians(ob.theta_end), w, BARRIER,
                              ob.strength or DEFAULT_BARRIER_STRENGTH,
                              center=(cfg.source.x, cfg.source.y))
    times = sample_times(cfg)
    rec, snaps = evolved_pair(sample_on_grid(psi, grid, cfg.source.t),
                              sample_on_grid(phi, grid, cfg.detector.t), pot,
                              cfg.source.t, cfg.detector.t, cfg.run.dt, times)
    report = RunReport(cfg.scenario)
    report.set_amplitude(rec)
    report.metrics["boundary_rho_max"] = max(boundary_max(f.values) for _, f in snaps)
    return report, snaps


def run_renninger1953(cfg: ScenarioConfig):
    m = cfg.mzi
    report = RunReport(cfg.scenario)
    calib = propagate_modes(mach_zehnder(m.arm, m.lead, k=m.k))
    blocked_graph = mach_zehnder(m.arm, m.lead, block_upper=m.block_upper,
                                 block_lower=not m.block_upper, k=m.k)
    blocked = propagate_modes(blocked_graph)
    report.detector_probabilities = dict(sorted(blocked.probabilities.items()))
    for name, p in sorted(calib.probabilities.items()):
        report.metrics[f"calibration_{name}"] = p
    report.metrics["calibration_total"] = calib.total
    report.metrics["blocked_total"] = blocked.total
    paths = handshake_paths(blocked_graph)
    report.open_paths = ["-".join(p.nodes) for p in paths if p.open]
    report.closed_paths = ["-".join(p.nodes) for p in paths if not p.open]
    chosen = next(p for p in paths if "-".join(p.nodes) == m.path)
    t_f = chosen.length / m.k
    times = [t_f * j / (m.frames - 1) for j in range(m.frames)]
    snaps = path_density_snapshots(chosen, m.k, m.width, times)
    report.metrics["path_length"] = chosen.length
    report.metrics["path_transit_time"] = t_f
    return report, snaps


def run_squarewell(cfg: ScenarioConfig):
    g = cfg.grid
    grid = Grid(g.xmin, g.xmax, g.nx)
    a = g.xmax - g.xmin
    xi1 = SquareWellMode(1, a, Direction.RETARDED)
    xi1_adv = SquareWellMode(1, a, Direction.ADVANCED)
    xi2_adv = SquareWellMode(2, a, Direction.ADVANCED)
    times = sample_times(cfg)
    same = transition_amplitude(xi1, xi1_adv, grid, times)
    cross = transition_amplitude(xi1, xi2_adv, grid, times)
    report = RunReport(cfg.scenario)
    report.set_amplitude(same)
    report.metrics["cross_A_s_abs"] = abs(cross.amplitude)
    report.metrics["cross_drift"] = cross.drift
    report.continuity_residual_max = max(
        continuity_residual(xi1, xi2_adv, grid, t, cfg.run.continuity_dt) for t in times)

    def rho(t):
        return amplitude_density(sample_on_grid(xi1, grid, t), sample_on_grid(xi2_adv, grid, t))

    rho0 = rho(0.0).values
    omega = 3 * math.pi**2 / (2 * a * a)
    snaps = [(t, rho(t)) for t in times]
    report.metrics["density_phase_error"] = max(
        float(np.max(np.abs(f.values - rho0 * np.exp(1j * omega * t)))) for t, f in snaps)
    return report, snaps


def same_circle_probabilities(cfg: ScenarioConfig, grid: Grid, n: int, times) -> np.ndarray:
    """P_s for ``n`` detectors spread evenly on the circle through the configured one."""
    s, d = cfg.source, cfg.detector
    R = math.hypot(d.x - s.x, d.y - s.y)
    psi = source_packet(s.x, s.y, s.t)
    probs = np.empty(n)
    for j in range(n):
        th = 2 * math.pi * j / n
        phi = detector_packet(s.x + R * math.cos(th), s.y + R * math.sin(th), d.t)
        probs[j] = transition_amplitude(psi, phi, grid, times).probability
    return probs


def run_angular_ensemble(cfg: ScenarioConfig):
    grid = _grid(cfg)
    n = cfg.run.detectors
    times = sample_times(cfg)
    report = RunReport(cfg.scenario)
    probs = same_circle_probabilities(cfg, grid, n, times)
    total = float(probs.sum())
    angles = np.degrees(2 * np.pi * np.arange(n) / n)
    ob = cfg.obstacle
    on_arc = (angles >= ob.theta_start) & (angles < ob.theta_end)
    report.metrics["isotropy_spread"] = float((probs.max() - probs.min()) / probs.mean())
    report.metrics["arc_share"] = float(probs[on_arc].sum() / total)
    report.metrics["arc_share_expected"] = (ob.theta_end - ob.theta_start) / 360.0
    report.P_s = float(probs.mean())

    center = (cfg.source.x, cfg.source.y)
    w = ob.thickness or DEFAULT_ABSORBER_THICKNESS
    pot = build_arc_potential(grid, ob.radius, math.radians(ob.theta_start),
                              math.radians(ob.theta_end), w, ABSORBER,
                              ob.strength or DEFAULT_ABSORBER_STRENGTH, center)
    regions = {"E1": arc_mask(grid, ob.radius, math.radians(ob.theta_start),
                              math.radians(ob.theta_end), w, center)}
    if ob.outer_radius is not None:
        outer = build_arc_potential(grid, ob.outer_radius, 0.0, 2 * math.pi, ob.outer_thickness,
                                    ABSORBER, ob.outer_strength, center)
        regions["E2"] = arc_mask(grid, ob.outer_radius, 0.0, 2 * math.pi, ob.outer_thickness,
                                 center) & ~regions["E1"]
        pot = pot + outer
    psi0 = sample_on_grid(source_packet(cfg.source.x, cfg.source.y, cfg.source.t), grid,
                          cfg.source.t)
    steps = max(1, int(round(cfg.run.absorb_time / cfg.run.absorb_dt)))
    snaps, absorbed = evolve_with_absorption(
        psi0, pot, EvolutionParams(cfg.run.absorb_dt, steps, Direction.RETARDED, steps,
                                   cfg.source.t), regions)
    final = snaps[-1][1]
    if not np.all(np.isfinite(final.values)):
        raise NumericError("absorber evolution produced non-finite values")
    start = psi0.norm2()
    report.absorbed_fraction = absorbed["E1"] / start
    report.metrics["absorbed_total"] = 1 - final.norm2() / start
    if "E2" in absorbed:
        report.metrics["absorbed_outer"] = absorbed["E2"] / start

    psi, phi = _events(cfg)
    rho = [(t, amplitude_density(sample_on_grid(psi, grid, t), sample_on_grid(phi, grid, t)))
           for t in times]
    return report, rho


RUNNERS = {
    "renninger1960": run_renninger1960,
    "renninger1953": run_renninger1953,
    "squarewell": run_squarewell,
    "angular_ensemble": run_angular_ensemble,
}


def simulate(cfg: ScenarioConfig):
    """Run without touching the filesystem; returns (report, snapshots)."""
    report, snaps = RUNNERS[cfg.scenario](cfg)
    _check_snapshots(snaps)
    report.snapshot_times = [float(t) for t, _ in snaps]
    return report, snaps


def run_scenario(cfg: ScenarioConfig, output_dir=None, emit: bool = True) -> RunReport:
    start = time.perf_counter()
    report, snaps = simulate(cfg)
    report.wall_time = time.perf_counter() - start
    report.check_finite()
    if emit:
        emit_outputs(report, snaps, cfg, output_dir)
    return report
