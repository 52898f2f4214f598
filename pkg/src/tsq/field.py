"""Uniform periodic grids, sampled complex fields and spectral operators.

Layout is row-major: a 2D field has shape ``(ny, nx)`` with y the outer
(slow) index, so ``values.ravel()`` enumerates x fastest.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.fft as sfft

from .errors import DomainError, ParameterError, ShapeError


@dataclass(frozen=True)
class Grid:
    """Periodic sample lattice; ``xmax`` is the wrap point, not a node."""

    xmin: float
    xmax: float
    nx: int
    ymin: Optional[float] = None
    ymax: Optional[float] = None
    ny: Optional[int] = None

    def __post_init__(self):
        if not self.xmax > self.xmin:
            raise ParameterError(f"grid needs xmax > xmin, got [{self.xmin}, {self.xmax}]")
        if int(self.nx) < 2:
            raise ParameterError(f"grid needs nx >= 2, got {self.nx}")
        two_d = [v is not None for v in (self.ymin, self.ymax, self.ny)]
        if any(two_d) and not all(two_d):
            raise ParameterError("2D grid needs ymin, ymax and ny together")
        if all(two_d):
            if not self.ymax > self.ymin:
                raise ParameterError(f"grid needs ymax > ymin, got [{self.ymin}, {self.ymax}]")
            if int(self.ny) < 2:
                raise ParameterError(f"grid needs ny >= 2, got {self.ny}")

    @classmethod
    def square(cls, lo: float, hi: float, n: int) -> "Grid":
        return cls(lo, hi, n, lo, hi, n)

    @property
    def dims(self) -> int:
        return 1 if self.ny is None else 2

    @property
    def shape(self) -> tuple:
        return (self.nx,) if self.dims == 1 else (self.ny, self.nx)

    @property
    def dx(self) -> float:
        return (self.xmax - self.xmin) / self.nx

    @property
    def dy(self) -> float:
        if self.dims == 1:
            raise ShapeError("1D grid has no y spacing")
        return (self.ymax - self.ymin) / self.ny

    @property
    def cell(self) -> float:
        """Quadrature weight of one node (dx, or dx*dy)."""
        return self.dx if self.dims == 1 else self.dx * self.dy

    @cached_property
    def x(self) -> np.ndarray:
        return self.xmin + np.arange(self.nx) * self.dx

    @cached_property
    def y(self) -> np.ndarray:
        return self.ymin + np.arange(self.ny) * self.dy

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) coordinate arrays of shape (ny, nx); shared, do not mutate."""
        return self._mesh

    @cached_property
    def _mesh(self):
        X, Y = np.meshgrid(self.x, self.y)
        X.flags.writeable = False
        Y.flags.writeable = False
        return X, Y

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Angular wavenumbers per axis, broadcastable against field values."""
        kx = 2 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)
        if self.dims == 1:
            return (kx,)
        ky = 2 * np.pi * np.fft.fftfreq(self.ny, d=self.dy)
        return (kx[np.newaxis, :], ky[:, np.newaxis])

    @cached_property
    def k_squared(self) -> np.ndarray:
        ks = self.wavenumbers
        return sum(k**2 for k in ks)

    @property
    def k2_max(self) -> float:
        return float(np.max(self.k_squared))

    def contains(self, x: float, y: Optional[float] = None) -> bool:
        inside = self.xmin <= x <= self.xmax
        if self.dims == 2:
            inside = inside and y is not None and self.ymin <= y <= self.ymax
        return inside

    def node_index(self, flat: int) -> tuple:
        return tuple(int(i) for i in np.unravel_index(flat, self.shape))


def _check_finite(values: np.ndarray, grid: Grid, what: str = "field") -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        idx = grid.node_index(int(np.flatnonzero(bad)[0]))
        raise DomainError(f"non-finite value in {what} at node {idx}")


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != self.grid.shape:
            if vals.size != int(np.prod(self.grid.shape)):
                raise ShapeError(f"{vals.size} values for grid of shape {self.grid.shape}")
            vals = vals.reshape(self.grid.shape)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, grid: Grid, c: complex) -> "ComplexField":
        return cls(grid, np.full(grid.shape, c, dtype=np.complex128))

    def conj(self) -> "ComplexField":
        return ComplexField(self.grid, np.conj(self.values))

    def abs2(self) -> np.ndarray:
        return self.values.real**2 + self.values.imag**2

    def norm2(self) -> float:
        """Integral of |f|^2."""
        return float(np.sum(self.abs2()) * self.grid.cell)

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy())

    def _coerce(self, other):
        if isinstance(other, ComplexField):
            _same_grid(self.grid, other.grid)
            return other.values
        return other

    def __add__(self, other):
        return ComplexField(self.grid, self.values + self._coerce(other))

    def __sub__(self, other):
        return ComplexField(self.grid, self.values - self._coerce(other))

    def __mul__(self, other):
        return ComplexField(self.grid, self.values * self._coerce(other))

    __radd__ = __add__
    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ComplexVectorField:
    """One complex component per axis (a single component on 1D grids)."""

    grid: Grid
    components: tuple

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=np.complex128) for c in self.components)
        if len(comps) != self.grid.dims:
            raise ShapeError(f"{len(comps)} components for a {self.grid.dims}D grid")
        for c in comps:
            if c.shape != self.grid.shape:
                raise ShapeError(f"component shape {c.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "components", comps)

    @property
    def x(self) -> np.ndarray:
        return self.components[0]

    @property
    def y(self) -> np.ndarray:
        return self.components[1]


def _same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise ShapeError(f"grid mismatch: {a} vs {b}")


def integrate(field: ComplexField) -> complex:
    """Riemann sum of the field over the periodic box."""
    _check_finite(field.values, field.grid)
    # numpy's pairwise summation has a fixed order, so results are reproducible.
    return complex(np.sum(field.values) * field.grid.cell)


def pointwise_product(a: ComplexField, b: ComplexField) -> ComplexField:
    _same_grid(a.grid, b.grid)
    return ComplexField(a.grid, a.values * b.values)


def _fft(v: np.ndarray) -> np.ndarray:
    return sfft.fftn(v)


def _ifft(v: np.ndarray) -> np.ndarray:
    return sfft.ifftn(v)


def spectral_laplacian(field: ComplexField) -> ComplexField:
    _check_finite(field.values, field.grid)
    k2 = field.grid.k_squared
    return ComplexField(field.grid, _ifft(-k2 * _fft(field.values)))


def spectral_gradient(field: ComplexField) -> ComplexVectorField:
    _check_finite(field.values, field.grid)
    spec = _fft(field.values)
    comps = tuple(_ifft(1j * k * spec) for k in field.grid.wavenumbers)
    return ComplexVectorField(field.grid, comps)


def divergence(vf: ComplexVectorField) -> ComplexField:
    total = np.zeros(vf.grid.shape, dtype=np.complex128)
    for comp, k in zip(vf.components, vf.grid.wavenumbers):
        _check_finite(comp, vf.grid, "vector component")
        total += 1j * k * _fft(comp)
    return ComplexField(vf.grid, _ifft(total))


def l2_norm(values: np.ndarray, grid: Grid) -> float:
    """sqrt of the integral of |values|^2."""
    return float(np.sqrt(np.sum(np.abs(values) ** 2) * grid.cell))


def boundary_max(values: np.ndarray) -> float:
    """Largest modulus on the outermost ring of nodes."""
    a = np.abs(values)
    if a.ndim == 1:
        return float(max(a[0], a[-1]))
    return float(max(a[0, :].max(), a[-1, :].max(), a[:, 0].max(), a[:, -1].max()))
