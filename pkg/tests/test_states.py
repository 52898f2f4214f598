import math
from dataclasses import dataclass

import numpy as np
import pytest

from tsq.errors import DomainError, ParameterError, ShapeError
from tsq.field import Grid, integrate
from tsq.states import (
    Direction,
    NarrowGaussian2D,
    SpacetimePoint,
    SquareWellMode,
    StationaryGaussian2D,
    TravelingGaussian2D,
    detector_packet,
    eval_state,
    sample_on_grid,
    schrodinger_residual,
    source_packet,
    with_direction,
)

RET, ADV = Direction.RETARDED, Direction.ADVANCED


def fd_defect(spec, x, y, t, h=1e-3):
    """Finite-difference defect of sign*i d/dt + 1/2 lap, computed pointwise."""
    def f(dx=0.0, dy=0.0, dt=0.0):
        return eval_state(spec, SpacetimePoint(x + dx, y + dy, t + dt))

    ddt = (f(dt=h) - f(dt=-h)) / (2 * h)
    lap = (f(dx=h) + f(dx=-h) + f(dy=h) + f(dy=-h) - 4 * f()) / h**2
    return spec.direction.sign * 1j * ddt + 0.5 * lap, abs(f())


STATES = [
    StationaryGaussian2D(SpacetimePoint(0.5, -1.0, 2.0), RET),
    StationaryGaussian2D(SpacetimePoint(0.5, -1.0, 2.0), ADV),
    TravelingGaussian2D(SpacetimePoint(0, 0, 0), (0.4, 0.1), 3.0, RET),
    TravelingGaussian2D(SpacetimePoint(0, 0, 0), (0.4, 0.1), 3.0, ADV),
    NarrowGaussian2D(SpacetimePoint(1, 1, 1), 0.7, ADV),
]


@pytest.mark.parametrize("spec", STATES, ids=lambda s: f"{type(s).__name__}-{s.direction.value}")
@pytest.mark.parametrize("pt", [(0.3, -0.2, 0.0), (1.5, 0.5, 3.0), (-1.0, -2.0, 7.5)])
def test_each_state_solves_its_own_wave_equation(spec, pt):
    defect, scale = fd_defect(spec, *pt)
    assert abs(defect) < 1e-4 * max(scale, 1e-3)


@dataclass
class WrongEquation:
    """A state paired with the opposite-direction wave equation."""

    inner: object

    @property
    def direction(self):
        return ADV if self.inner.direction is RET else RET

    def sample(self, X, Y, t):
        return self.inner.sample(X, Y, t)


@pytest.mark.parametrize("spec", STATES[:4], ids=lambda s: f"{type(s).__name__}-{s.direction.value}")
def test_wrong_direction_fails_the_equation(spec):
    defect, scale = fd_defect(WrongEquation(spec), 0.7, 0.4, 4.0)
    assert abs(defect) > 1e-2 * scale


def test_stationary_packet_is_unit_sigma_gaussian_at_anchor():
    spec = source_packet(0, 0, 0)
    assert abs(eval_state(spec, SpacetimePoint(0, 0, 0))) ** 2 == pytest.approx(1 / (2 * math.pi))
    r = 1.7
    want = math.exp(-r * r / 2) / (2 * math.pi)
    assert abs(eval_state(spec, SpacetimePoint(r, 0, 0))) ** 2 == pytest.approx(want)


@pytest.mark.parametrize("spec", STATES[:4], ids=str)
@pytest.mark.parametrize("t", [0.0, 5.0])
def test_unit_norm(spec, t):
    g = Grid.square(-40, 40, 256)
    f = sample_on_grid(spec, g, t)
    assert f.norm2() == pytest.approx(1.0, abs=1e-9)


def test_narrow_state_width():
    g = Grid.square(-3, 3, 256)
    spec = NarrowGaussian2D(SpacetimePoint(0.2, -0.1, 0), 0.3)
    w = sample_on_grid(spec, g, 0).abs2()
    X, _ = g.mesh()
    var = np.sum(w * (X - 0.2) ** 2) / np.sum(w)
    assert math.sqrt(var) == pytest.approx(0.3, rel=1e-9)


def test_traveling_packet_moves_with_group_velocity():
    g = Grid.square(-60, 60, 256)
    spec = TravelingGaussian2D(SpacetimePoint(-10, 2, 0), (0.8, -0.3), 4.0, RET)
    w = sample_on_grid(spec, g, 25.0).abs2()
    X, Y = g.mesh()
    cx, cy = np.sum(w * X) / np.sum(w), np.sum(w * Y) / np.sum(w)
    assert cx == pytest.approx(-10 + 0.8 * 25, abs=1e-8)
    assert cy == pytest.approx(2 - 0.3 * 25, abs=1e-8)


def test_mirror_relation_for_coincident_anchors():
    # advanced packet anchored at (x, y, T) retraces the retarded one from (x, y, 0)
    psi = source_packet(1.0, 2.0, 0.0)
    phi = detector_packet(1.0, 2.0, 28.0)
    for tau in (0.0, 3.5, 14.0, 28.0):
        for x, y in ((1, 2), (4, -1), (-3, 0.5)):
            a = eval_state(phi, SpacetimePoint(x, y, 28.0 - tau))
            b = eval_state(psi, SpacetimePoint(x, y, tau))
            assert a == pytest.approx(b, abs=1e-15)


def test_advanced_is_conjugate_of_retarded_with_same_anchor():
    anchor = SpacetimePoint(0, -60, 28)
    phi = StationaryGaussian2D(anchor, ADV)
    ret = StationaryGaussian2D(anchor, RET)
    for t in (0, 7, 14):
        p = SpacetimePoint(3, -50, t)
        assert eval_state(phi, p) == pytest.approx(np.conj(eval_state(ret, p)), abs=1e-16)


def test_square_well_modes_are_orthonormal():
    g = Grid(0.0, 2.0, 512)
    modes = [sample_on_grid(SquareWellMode(n, 2.0), g, 0.3) for n in (1, 2, 3)]
    for i, a in enumerate(modes):
        for j, b in enumerate(modes):
            val = integrate(a.conj() * b)
            assert val == pytest.approx(1.0 if i == j else 0.0, abs=1e-12)


def test_square_well_phase():
    spec = SquareWellMode(2, 1.0, RET)
    e2 = (2 * math.pi) ** 2 / 2
    v0 = eval_state(spec, SpacetimePoint(0.3))
    v1 = eval_state(spec, SpacetimePoint(0.3, 0, 0.1))
    assert v1 / v0 == pytest.approx(np.exp(-1j * e2 * 0.1))
    adv = with_direction(spec, ADV)
    assert eval_state(adv, SpacetimePoint(0.3, 0, 0.1)) == pytest.approx(np.conj(v1))


def test_square_well_outside_box_is_domain_error():
    with pytest.raises(DomainError):
        SquareWellMode(1, 1.0).sample(np.array([1.2]), None, 0.0)


@pytest.mark.parametrize("n", [0, -1, 1.5])
def test_bad_square_well_index(n):
    with pytest.raises(ParameterError):
        SquareWellMode(n)


def test_bad_widths():
    with pytest.raises(ParameterError):
        NarrowGaussian2D(SpacetimePoint(0), 0.0)
    with pytest.raises(ParameterError):
        TravelingGaussian2D(SpacetimePoint(0), s=-1.0)
    with pytest.raises(ParameterError):
        SpacetimePoint(float("nan"))


def test_dimension_mismatch():
    with pytest.raises(ShapeError):
        sample_on_grid(SquareWellMode(1), Grid.square(0, 1, 8), 0)
    with pytest.raises(ShapeError):
        sample_on_grid(source_packet(), Grid(0, 1, 8), 0)


def test_spectral_residual_agrees_with_pointwise_oracle():
    g = Grid.square(-30, 30, 256)
    spec = TravelingGaussian2D(SpacetimePoint(0, 0, 0), (0.4, 0.0), 4.0, ADV)
    assert schrodinger_residual(spec, g, 3.0) < 1e-6

    @dataclass
    class Corrupted:
        direction: Direction = ADV
        dims: int = 2

        def sample(self, X, Y, t):
            return spec.sample(X, Y, t) * np.exp(0.05j * t)

    assert schrodinger_residual(Corrupted(), g, 3.0) > 1e-2
