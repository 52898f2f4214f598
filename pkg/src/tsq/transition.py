"""Transition amplitude density, its current, and the conserved amplitude.

For a retarded psi and an advanced phi* the density rho_s = phi* psi and the
current j_s = (phi* grad psi - psi grad phi*) / 2i obey
d rho_s/dt + div j_s = 0, so the amplitude A_s = integral of rho_s does not
depend on the time at which it is evaluated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ParameterError, ResolutionError, ShapeError, TruncationError
from .field import (
    ComplexField,
    ComplexVectorField,
    Grid,
    _same_grid,
    boundary_max,
    divergence,
    integrate,
    l2_norm,
    pointwise_product,
    spectral_gradient,
)
from .states import (
    Direction,
    NarrowGaussian2D,
    SpacetimePoint,
    SquareWellMode,
    sample_on_grid,
)

# absolute |rho_s| allowed on the outermost ring of nodes
SUPPORT_THRESHOLD = 1e-10


@dataclass
class TransitionRecord:
    amplitude_samples: list
    amplitude: complex
    probability: float
    drift: float
    continuity_residuals: list = field(default_factory=list)

    @classmethod
    def from_samples(cls, samples: Sequence) -> "TransitionRecord":
        samples = sorted((float(t), complex(a)) for t, a in samples)
        if len({t for t, _ in samples}) < 3:
            raise ParameterError("a transition record needs at least 3 distinct sample times")
        amps = np.array([a for _, a in samples])
        mean = complex(amps.mean())
        drift = float(np.max(np.abs(amps - mean)))
        return cls(samples, mean, abs(mean) ** 2, drift)

    @property
    def relative_drift(self) -> float:
        return self.drift / max(abs(self.amplitude), 1e-12)


def amplitude_density(psi: ComplexField, phi_star: ComplexField) -> ComplexField:
    return pointwise_product(phi_star, psi)


def current_density(psi: ComplexField, phi_star: ComplexField) -> ComplexVectorField:
    _same_grid(psi.grid, phi_star.grid)
    gp = spectral_gradient(psi).components
    gq = spectral_gradient(phi_star).components
    comps = tuple((phi_star.values * a - psi.values * b) / 2j for a, b in zip(gp, gq))
    return ComplexVectorField(psi.grid, comps)


def _require_pair(psi_spec, phi_spec):
    if Direction(psi_spec.direction) is not Direction.RETARDED:
        raise ParameterError("initial state must be retarded")
    if Direction(phi_spec.direction) is not Direction.ADVANCED:
        raise ParameterError("final state must be advanced")


def _check_support(rho: ComplexField, t: float) -> None:
    if rho.grid.dims == 1:
        # 1D states here live in a box whose walls coincide with the grid ends
        return
    edge = boundary_max(rho.values)
    if edge > SUPPORT_THRESHOLD:
        raise TruncationError(
            f"transition density reaches the grid boundary at t={t:g} "
            f"(|rho_s| = {edge:.3g} > {SUPPORT_THRESHOLD:g})")


def transition_amplitude(psi_spec, phi_spec, grid: Grid, sample_times: Sequence[float]
                         ) -> TransitionRecord:
    _require_pair(psi_spec, phi_spec)
    t_lo = getattr(getattr(psi_spec, "anchor", None), "t", None)
    t_hi = getattr(getattr(phi_spec, "anchor", None), "t", None)
    samples = []
    for t in sample_times:
        if t_lo is not None and t_hi is not None and not t_lo <= t <= t_hi:
            raise ParameterError(f"sample time {t} outside [{t_lo}, {t_hi}]")
        rho = amplitude_density(sample_on_grid(psi_spec, grid, t),
                                sample_on_grid(phi_spec, grid, t))
        _check_support(rho, t)
        samples.append((t, integrate(rho)))
    return TransitionRecord.from_samples(samples)


def record_from_fields(samples: Sequence) -> TransitionRecord:
    """Record from numerically evolved ``(t, psi, phi_star)`` triples."""
    amps = []
    for t, psi, phi_star in samples:
        rho = amplitude_density(psi, phi_star)
        amps.append((t, integrate(rho)))
    return TransitionRecord.from_samples(amps)


def _odd_extension(grid: Grid) -> Grid:
    # sin(n pi x / a) continued to [-a, a) is smooth and periodic there
    return Grid(grid.xmin - (grid.xmax - grid.xmin), grid.xmax, 2 * grid.nx)


def continuity_residual(psi_spec, phi_spec, grid: Grid, t: float, dt: float = 1e-3) -> float:
    """L2 norm of d(rho_s)/dt + div(j_s): central difference in time, spectral in space."""
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    work = grid
    if isinstance(psi_spec, SquareWellMode) or isinstance(phi_spec, SquareWellMode):
        if grid.dims != 1 or grid.xmin != 0:
            raise ShapeError("square-well states need a 1D grid starting at x = 0")
        work = _odd_extension(grid)

    def sample(spec, tt):
        if work is grid:
            return sample_on_grid(spec, work, tt)
        return ComplexField(work, _sample_odd(spec, work.x, tt))

    def rho(tt):
        return amplitude_density(sample(psi_spec, tt), sample(phi_spec, tt)).values

    ddt = (rho(t + dt) - rho(t - dt)) / (2 * dt)
    div = divergence(current_density(sample(psi_spec, t), sample(phi_spec, t))).values
    res = ddt + div
    if work is not grid:
        return l2_norm(res[grid.nx:], grid)
    return l2_norm(res, grid)


def _sample_odd(spec: SquareWellMode, x: np.ndarray, t: float) -> np.ndarray:
    sign = np.where(x < 0, -1.0, 1.0)
    return sign * spec.sample(np.abs(x), None, t)


class BornSample(NamedTuple):
    sigma_delta: float
    discrepancy: float
    density: float


def born_rule_reduction(psi_spec, event: SpacetimePoint, sigma_deltas: Sequence[float],
                        grid: Grid) -> list:
    """Probability density at ``event`` recovered from a shrinking final state.

    For each width the final state is a narrow advanced Gaussian at the
    event.  The weighted mean of |rho_s|^2 / |phi*|^2 over the grid, i.e.
    integral |phi* psi|^2 / integral |phi*|^2, tends to |psi(event)|^2 as the
    width goes to zero.
    """
    if Direction(psi_spec.direction) is not Direction.RETARDED:
        raise ParameterError("initial state must be retarded")
    sig = [float(s) for s in sigma_deltas]
    if not sig or any(s <= 0 for s in sig):
        raise ParameterError("sigma_deltas must be positive")
    if any(b >= a for a, b in zip(sig, sig[1:])):
        raise ParameterError("sigma_deltas must be strictly decreasing")
    if not grid.contains(event.x, event.y):
        raise TruncationError(f"event ({event.x}, {event.y}) lies outside the grid")
    spacing = max(grid.dx, grid.dy)
    if sig[-1] < 2 * spacing:
        raise ResolutionError(
            f"sigma_delta={sig[-1]} below twice the grid spacing {spacing:g}")
    psi = sample_on_grid(psi_spec, grid, event.t)
    target = abs(complex(psi_spec.sample(np.float64(event.x), np.float64(event.y), event.t))) ** 2
    out = []
    for s in sig:
        phi = sample_on_grid(NarrowGaussian2D(event, s, Direction.ADVANCED), grid, event.t)
        if boundary_max(phi.values) > SUPPORT_THRESHOLD:
            raise TruncationError(f"final state of width {s} is cut off by the grid")
        w = phi.abs2()
        density = float(np.sum(w * psi.abs2()) / np.sum(w))
        out.append(BornSample(s, abs(density - target), density))
    return out


def richardson_limit(samples: Sequence[BornSample], order: float = 2.0) -> float:
    """Extrapolate the last two densities to zero width assuming error ~ sigma**order."""
    if len(samples) < 2:
        raise ParameterError("need at least two widths to extrapolate")
    (s1, _, v1), (s2, _, v2) = samples[-2], samples[-1]
    r = (s1 / s2) ** order
    return v2 + (v2 - v1) / (r - 1)


def centroid(field: ComplexField) -> tuple:
    """Centroid of |f| (2D grids)."""
    w = np.abs(field.values)
    X, Y = field.grid.mesh()
    total = np.sum(w)
    return float(np.sum(w * X) / total), float(np.sum(w * Y) / total)


def closed_form_stationary_amplitude(source: SpacetimePoint, detector: SpacetimePoint) -> complex:
    """Exact overlap of the sigma = 1 retarded and advanced packets.

    Both factors are Gaussians in r, so the integral at the emission time
    t_i reduces to a 2D Gaussian integral:
    A = exp(-d^2 / (8 + 2 i T)) / (1 + i T / 4), d = |r_f - r_i|, T = t_f - t_i.
    """
    d2 = (detector.x - source.x) ** 2 + (detector.y - source.y) ** 2
    T = detector.t - source.t
    return complex(np.exp(-d2 / (8 + 2j * T)) / (1 + 1j * T / 4))
