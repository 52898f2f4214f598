"""Closed-form retarded and advanced wavefunctions (hbar = m = 1).

All 2D Gaussians share one family, parameterized by an anchor event
(x_a, y_a, t_a), a wave vector k and a width s::

    g(r, t) = (s / sqrt(pi)) / (s^2 + i*tau)
              * exp(i*(k.dr - |k|^2 tau / 2) - |dr - k tau|^2 / (2 s^2 + 2 i tau))

with dr = r - r_a, tau = t - t_a.  This solves i dg/dt = -1/2 lap g and has
unit norm.  s^2 = 2, k = 0 is the sigma = 1 stationary packet; s^2 = 5000,
k = (0.4, 0) is the default traveling packet.

Advanced states are the complex conjugate of the retarded state with the same
anchor, evaluated at the same time.  They solve -i dphi/dt = -1/2 lap phi, and
for k = 0 this is the (t_a - t) substitution of the stationary packet.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .errors import DomainError, ParameterError, ShapeError
from .field import ComplexField, Grid, l2_norm, spectral_laplacian


class Direction(str, enum.Enum):
    RETARDED = "retarded"
    ADVANCED = "advanced"

    @property
    def sign(self) -> int:
        """+1 for retarded (i d/dt), -1 for advanced (-i d/dt)."""
        return 1 if self is Direction.RETARDED else -1


@dataclass(frozen=True)
class SpacetimePoint:
    x: float
    y: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.t)):
            raise ParameterError(f"non-finite spacetime point {self}")


def _gaussian(X, Y, t, anchor: SpacetimePoint, kx: float, ky: float, s2: float,
              direction: Direction):
    tau = t - anchor.t
    dx = X - anchor.x
    dy = Y - anchor.y
    ex = dx - kx * tau
    ey = dy - ky * tau
    k2 = kx * kx + ky * ky
    pref = math.sqrt(s2 / math.pi) / (s2 + 1j * tau)
    expo = 1j * (kx * dx + ky * dy - 0.5 * k2 * tau) - (ex * ex + ey * ey) / (2 * s2 + 2j * tau)
    val = pref * np.exp(expo)
    if direction is Direction.ADVANCED:
        val = np.conj(val)
    return val


class _Gaussian2D:
    dims = 2

    def sample(self, X, Y, t):
        kx, ky = self._k()
        return _gaussian(X, Y, t, self.anchor, kx, ky, self._s2(), Direction(self.direction))

    def _k(self):
        return 0.0, 0.0


@dataclass(frozen=True)
class SquareWellMode:
    n: int
    a: float = 1.0
    direction: Direction = Direction.RETARDED

    dims = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"square-well mode needs integer n >= 1, got {self.n}")
        if not self.a > 0:
            raise ParameterError(f"well length must be positive, got {self.a}")

    def sample(self, X, Y, t):
        X = np.asarray(X, dtype=float)
        if np.any(X < 0) or np.any(X > self.a):
            raise DomainError(f"square-well mode evaluated outside [0, {self.a}]")
        energy = (self.n * math.pi / self.a) ** 2 / 2
        phase = np.exp(-1j * energy * t * Direction(self.direction).sign)
        return math.sqrt(2 / self.a) * np.sin(self.n * math.pi * X / self.a) * phase


@dataclass(frozen=True)
class StationaryGaussian2D(_Gaussian2D):
    """sigma = 1 packet at rest, centred on ``anchor``."""

    anchor: SpacetimePoint
    direction: Direction = Direction.RETARDED

    def _s2(self):
        return 2.0


@dataclass(frozen=True)
class TravelingGaussian2D(_Gaussian2D):
    anchor: SpacetimePoint
    k: tuple = (0.4, 0.0)
    s: float = math.sqrt(5000.0)
    direction: Direction = Direction.RETARDED

    def __post_init__(self):
        if not self.s > 0:
            raise ParameterError(f"width s must be positive, got {self.s}")

    def _s2(self):
        return self.s * self.s

    def _k(self):
        return float(self.k[0]), float(self.k[1])


@dataclass(frozen=True)
class NarrowGaussian2D(_Gaussian2D):
    """Delta-function surrogate: stationary packet with |psi|^2 std ``sigma_delta``."""

    anchor: SpacetimePoint
    sigma_delta: float = 0.05
    direction: Direction = Direction.ADVANCED

    def __post_init__(self):
        if not self.sigma_delta > 0:
            raise ParameterError(f"sigma_delta must be positive, got {self.sigma_delta}")

    def _s2(self):
        return 2.0 * self.sigma_delta**2


StateSpec = Union[SquareWellMode, StationaryGaussian2D, TravelingGaussian2D, NarrowGaussian2D]


def with_direction(spec, direction: Direction):
    return replace(spec, direction=Direction(direction))


def eval_state(spec: StateSpec, p: SpacetimePoint) -> complex:
    return complex(spec.sample(np.float64(p.x), np.float64(p.y), p.t))


def sample_on_grid(spec: StateSpec, grid: Grid, t: float) -> ComplexField:
    if grid.dims != spec.dims:
        raise ShapeError(f"{type(spec).__name__} is {spec.dims}D but grid is {grid.dims}D")
    if grid.dims == 1:
        return ComplexField(grid, spec.sample(grid.x, None, t))
    X, Y = grid.mesh()
    return ComplexField(grid, spec.sample(X, Y, t))


def schrodinger_residual(spec, grid: Grid, t: float, dt: float = 1e-3) -> float:
    """L2 defect of the sampled state against its own wave equation.

    Central difference in time, spectral Laplacian in space.
    """
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    sign = Direction(spec.direction).sign
    now = sample_on_grid(spec, grid, t)
    ddt = (sample_on_grid(spec, grid, t + dt).values
           - sample_on_grid(spec, grid, t - dt).values) / (2 * dt)
    defect = sign * 1j * ddt + 0.5 * spectral_laplacian(now).values
    return l2_norm(defect, grid)


def source_packet(x_i=0.0, y_i=0.0, t_i=0.0) -> StationaryGaussian2D:
    """Retarded sigma = 1 packet emitted at (x_i, y_i, t_i)."""
    return StationaryGaussian2D(SpacetimePoint(x_i, y_i, t_i), Direction.RETARDED)


def detector_packet(x_f=0.0, y_f=-60.0, t_f=28.0) -> StationaryGaussian2D:
    """Advanced sigma = 1 packet absorbed at (x_f, y_f, t_f)."""
    return StationaryGaussian2D(SpacetimePoint(x_f, y_f, t_f), Direction.ADVANCED)
