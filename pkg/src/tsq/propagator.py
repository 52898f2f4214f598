"""Strang split-step evolution on periodic 2D grids.

Retarded fields obey  i dpsi/dt = (-1/2 lap + V) psi.
Advanced fields obey -i dphi/dt = (-1/2 lap + conj(V)) phi, i.e. they are
complex conjugates of retarded solutions, so an advanced step is
``conj(step(conj(f)))``.

``evolve`` marches retarded fields forward from their initial event and
advanced fields backward from their final event.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft as sfft

from .errors import ParameterError, ShapeError
from .field import ComplexField, Grid, _same_grid
from .states import Direction

BARRIER = "barrier"
ABSORBER = "absorber"


@dataclass(frozen=True, eq=False)
class Potential:
    """Complex potential: Re >= 0 barriers, Im <= 0 absorbers."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != self.grid.shape:
            raise ShapeError(f"potential shape {vals.shape} != grid shape {self.grid.shape}")
        if np.any(vals.real < 0):
            raise ParameterError("potential real part must be >= 0")
        if np.any(vals.imag > 0):
            raise ParameterError("potential imaginary part must be <= 0")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, grid: Grid) -> "Potential":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    @property
    def is_real(self) -> bool:
        return not np.any(self.values.imag)

    def __add__(self, other: "Potential") -> "Potential":
        _same_grid(self.grid, other.grid)
        return Potential(self.grid, self.values + other.values)


@dataclass(frozen=True)
class EvolutionParams:
    dt: float = 0.01
    steps: int = 1
    direction: Direction = Direction.RETARDED
    snapshot_stride: int = 1
    t0: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if int(self.steps) < 1:
            raise ParameterError(f"steps must be >= 1, got {self.steps}")
        if int(self.snapshot_stride) < 1:
            raise ParameterError(f"snapshot_stride must be >= 1, got {self.snapshot_stride}")


def arc_mask(grid: Grid, r_c: float, theta0: float, theta1: float, w: float,
             center=(0.0, 0.0)) -> np.ndarray:
    X, Y = grid.mesh()
    dx = X - center[0]
    dy = Y - center[1]
    r = np.hypot(dx, dy)
    ang = np.mod(np.arctan2(dy, dx), 2 * np.pi)
    return (np.abs(r - r_c) <= w / 2) & (ang >= theta0) & (ang <= theta1)


def build_arc_potential(grid: Grid, r_c: float, theta0: float, theta1: float, w: float,
                        mode: str = BARRIER, V0: float = 1e3, center=(0.0, 0.0)) -> Potential:
    """Annular-arc obstacle (barrier) or detector surface (absorber).

    Angles are radians, measured counter-clockwise from +x about ``center``;
    ``theta1 = 2*pi`` closes the ring.  Absorbers ramp quadratically from 0 at
    the inner rim to ``V0`` at the outer rim.
    """
    if grid.dims != 2:
        raise ShapeError("arc potentials need a 2D grid")
    if not w > 0:
        raise ParameterError(f"arc thickness must be positive, got {w}")
    if V0 < 0:
        raise ParameterError(f"arc strength must be >= 0, got {V0}")
    if not 0 <= theta0 < 2 * math.pi or not theta0 <= theta1 <= 2 * math.pi:
        raise ParameterError(f"arc interval [{theta0}, {theta1}] not within [0, 2pi]")
    if theta0 == theta1:
        raise ParameterError("degenerate arc interval")
    if mode not in (BARRIER, ABSORBER):
        raise ParameterError(f"unknown arc mode {mode!r}")
    mask = arc_mask(grid, r_c, theta0, theta1, w, center)
    vals = np.zeros(grid.shape, dtype=np.complex128)
    if mode == BARRIER:
        vals[mask] = V0
    else:
        X, Y = grid.mesh()
        depth = (np.hypot(X - center[0], Y - center[1]) - (r_c - w / 2)) / w
        vals[mask] = -1j * V0 * np.clip(depth[mask], 0.0, 1.0) ** 2
    return Potential(grid, vals)


def check_aliasing(grid: Grid, dt: float) -> None:
    phase = dt * grid.k2_max / 2
    if not phase < math.pi:
        raise ParameterError(
            f"dt={dt} too large for this grid: kinetic phase per step {phase:.3f} >= pi")


def _kinetic_phase(grid: Grid, dt: float, sign: int) -> np.ndarray:
    return np.exp(-sign * 1j * dt * grid.k_squared / 2)


def splitstep_step(field: ComplexField, pot: Potential, dt: float,
                   direction: Direction = Direction.RETARDED) -> ComplexField:
    """One Strang step advancing the field by +dt under its own wave equation."""
    _same_grid(field.grid, pot.grid)
    check_aliasing(field.grid, dt)
    direction = Direction(direction)
    sign = direction.sign
    half = _kinetic_phase(field.grid, dt / 2, sign)
    V = pot.values if direction is Direction.RETARDED else np.conj(pot.values)
    vphase = np.exp(-sign * 1j * dt * V)
    f = sfft.ifftn(half * sfft.fftn(field.values))
    f *= vphase
    f = sfft.ifftn(half * sfft.fftn(f))
    return ComplexField(field.grid, f)


def _march(field: ComplexField, pot: Potential, params: EvolutionParams,
           regions: Optional[dict] = None):
    """Shared loop for ``evolve``; returns (snapshots, absorbed-per-region)."""
    _same_grid(field.grid, pot.grid)
    grid = field.grid
    dt = params.dt
    check_aliasing(grid, dt)
    direction = Direction(params.direction)
    if direction is Direction.RETARDED:
        V = pot.values
        tsign = 1
    else:
        if not pot.is_real:
            # backward march of an advanced field through an absorber amplifies it
            raise ParameterError("advanced evolution supports real potentials only")
        # inverse of the advanced step: Kh exp(-i dt conj V) Kh
        V = np.conj(pot.values)
        tsign = -1
    half = _kinetic_phase(grid, dt / 2, 1)
    full = half * half
    vphase = np.exp(-1j * dt * V)
    loss = None
    if regions:
        # |exp(-i dt V)|^2 per node; everything else in the step is unitary
        keep = np.abs(vphase) ** 2
        loss = {name: np.where(mask, 1.0 - keep, 0.0) for name, mask in regions.items()}
    absorbed = {name: 0.0 for name in (regions or {})}

    # h holds the state with the trailing half-kinetic factor not yet applied,
    # which lets consecutive half steps fuse into one transform pair per step.
    h = sfft.ifftn(half * sfft.fftn(field.values))
    snaps = [(params.t0, field.copy())]
    cell = grid.cell
    for n in range(1, int(params.steps) + 1):
        if n > 1:
            h = sfft.ifftn(full * sfft.fftn(h))
        if loss is not None:
            a2 = h.real**2 + h.imag**2
            for name, lw in loss.items():
                absorbed[name] += float(np.sum(a2 * lw) * cell)
        h = h * vphase
        if n % params.snapshot_stride == 0 or n == params.steps:
            out = sfft.ifftn(half * sfft.fftn(h))
            snaps.append((params.t0 + tsign * n * dt, ComplexField(grid, out)))
    return snaps, absorbed


def evolve(field: ComplexField, pot: Potential, params: EvolutionParams) -> list:
    """Snapshots [(t, field), ...] at every ``snapshot_stride`` steps, first and last included.

    The input field is taken to be at ``params.t0``; advanced fields step
    toward earlier times.  The input is never mutated.
    """
    snaps, _ = _march(field, pot, params)
    return snaps


def evolve_with_absorption(field: ComplexField, pot: Potential, params: EvolutionParams,
                           regions: dict) -> tuple:
    """``evolve`` plus the norm removed inside each named boolean mask.

    The potential phase is the only non-unitary factor of a step, so the
    per-node loss |f|^2 (1 - |exp(-i dt V)|^2) attributes the total norm
    decrease exactly to the regions that caused it.
    """
    return _march(field, pot, params, regions)
