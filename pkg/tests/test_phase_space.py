import math

import numpy as np
import pytest

from fetomo.errors import AmbiguousPeakError, UndefinedWidthError
from fetomo.ladder import DensityMatrix, EnergyWindow
from fetomo.phase_space import (
    PositionGrid,
    coherence_moments,
    fwhm,
    temporal_density,
    wigner,
)

TWO_PI = 2.0 * math.pi


def random_density(window, rng):
    d = window.dimension
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    return DensityMatrix.from_array(window, rho)


def wigner_quadrature(rho, x, p, n_points=10_000):
    """Independent midpoint quadrature of the defining integral over y."""
    idx = rho.window.indices
    y = -math.pi + (np.arange(n_points) + 0.5) * TWO_PI / n_points
    bra = np.exp(1j * np.multiply.outer(x - y / 2.0, idx)) / math.sqrt(TWO_PI)
    ket = np.exp(1j * np.multiply.outer(x + y / 2.0, idx)) / math.sqrt(TWO_PI)
    kernel_vals = np.einsum("ya,ab,yb->y", bra, rho.array, ket.conj())
    integrand = kernel_vals * np.exp(1j * p * y)
    return float(np.sum(integrand).real * (TWO_PI / n_points) / TWO_PI)


def vacuum(window):
    amp = np.zeros(window.dimension)
    amp[window.index_of(0)] = 1.0
    return DensityMatrix.pure(window, amp)


def balanced_superposition(window=EnergyWindow(0, 1)):
    return DensityMatrix.pure(window, np.ones(window.dimension) / np.sqrt(window.dimension))


class TestPositionGrid:
    def test_values(self):
        grid = PositionGrid(64)
        assert grid.values[0] == pytest.approx(-math.pi)
        assert grid.values.size == 64
        assert grid.values[-1] < math.pi

    def test_minimum_size(self):
        with pytest.raises(ValueError):
            PositionGrid(32)


class TestWigner:
    def test_vacuum_table(self):
        w = EnergyWindow(-3, 3)
        table = wigner(vacuum(w), PositionGrid(128))
        i0 = w.index_of(0)
        expected = np.zeros(w.dimension)
        expected[i0] = 1.0 / TWO_PI
        for row in table.values:
            assert np.allclose(row, expected, atol=1e-14)

    def test_superposition_origin_value(self):
        # frozen from the quadrature oracle of the defining integral
        rho = balanced_superposition()
        grid = PositionGrid(128)
        table = wigner(rho, grid)
        ix = np.argmin(np.abs(grid.values))
        assert grid.values[ix] == 0.0
        got = table.values[ix, rho.window.index_of(0)]
        assert got == pytest.approx(1.0 / (4 * math.pi) + 1.0 / math.pi**2, abs=1e-12)
        assert got == pytest.approx(wigner_quadrature(rho, 0.0, 0), abs=1e-6)

    def test_against_quadrature(self):
        rng = np.random.default_rng(12)
        w = EnergyWindow(-3, 2)
        rho = random_density(w, rng)
        grid = PositionGrid(64)
        table = wigner(rho, grid)
        for _ in range(12):
            ix = rng.integers(0, grid.n_points)
            ip = rng.integers(0, w.dimension)
            oracle = wigner_quadrature(rho, grid.values[ix], int(w.indices[ip]))
            assert table.values[ix, ip] == pytest.approx(oracle, abs=1e-6)

    def test_momentum_marginal(self):
        rng = np.random.default_rng(3)
        w = EnergyWindow(-4, 4)
        rho = random_density(w, rng)
        table = wigner(rho, PositionGrid(256))
        assert np.allclose(table.momentum_marginal(), np.diag(rho.array).real, atol=1e-8)

    def test_position_marginal(self):
        rng = np.random.default_rng(4)
        w = EnergyWindow(-4, 3)
        rho = random_density(w, rng)
        grid = PositionGrid(256)
        table = wigner(rho, grid)
        assert np.allclose(table.position_marginal, temporal_density(rho, grid), atol=1e-8)

    def test_normalisation(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            d = rng.integers(2, 13)
            n_max = int(rng.integers(0, d))
            w = EnergyWindow(n_max - d + 1, n_max)
            rho = random_density(w, rng)
            table = wigner(rho, PositionGrid(128))
            assert table.normalization() == pytest.approx(1.0, abs=1e-8)

    def test_values_real(self):
        rng = np.random.default_rng(6)
        rho = random_density(EnergyWindow(-3, 3), rng)
        table = wigner(rho, PositionGrid(64))
        assert table.values.dtype == float

    def test_wider_momentum_window(self):
        rng = np.random.default_rng(7)
        w = EnergyWindow(-2, 2)
        rho = random_density(w, rng)
        grid = PositionGrid(128)
        table = wigner(rho, grid, momenta=EnergyWindow(-6, 6))
        assert np.allclose(table.position_marginal, temporal_density(rho, grid), atol=1e-10)
        marg = table.momentum_marginal()
        assert np.allclose(marg[4:9], np.diag(rho.array).real, atol=1e-10)
        assert np.allclose(marg[:4], 0.0, atol=1e-10)


class TestTemporalDensity:
    def test_single_level_is_flat(self):
        w = EnergyWindow(-2, 2)
        for n in w.indices:
            amp = np.zeros(w.dimension)
            amp[w.index_of(n)] = 1.0
            density = temporal_density(DensityMatrix.pure(w, amp), PositionGrid(64))
            assert np.allclose(density, 1.0 / TWO_PI, atol=1e-14)

    def test_diagonal_is_flat(self):
        rng = np.random.default_rng(8)
        w = EnergyWindow(-3, 3)
        rho = DensityMatrix.from_array(w, np.diag(rng.dirichlet(np.ones(w.dimension))))
        density = temporal_density(rho, PositionGrid(64))
        assert np.allclose(density, 1.0 / TWO_PI, atol=1e-14)

    def test_two_level_superposition(self):
        grid = PositionGrid(256)
        density = temporal_density(balanced_superposition(), grid)
        expected = (1.0 + np.cos(grid.values)) / TWO_PI
        assert np.allclose(density, expected, atol=1e-13)

    def test_integrates_to_one(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            rho = random_density(EnergyWindow(-5, 5), rng)
            density = temporal_density(rho, PositionGrid(512))
            assert np.mean(density) * TWO_PI == pytest.approx(1.0, abs=1e-8)


class TestFwhm:
    def test_raised_cosine(self):
        grid = PositionGrid(1024)
        density = (1.0 + np.cos(grid.values)) / TWO_PI
        assert fwhm(density) == pytest.approx(0.5, abs=1e-4)

    def test_wrapped_gaussian(self):
        sigma = 0.05 * TWO_PI
        grid = PositionGrid(1024)
        x = grid.values
        density = np.zeros_like(x)
        for k in range(-5, 6):
            density += np.exp(-((x + TWO_PI * k) ** 2) / (2 * sigma**2))
        expected = 2.0 * math.sqrt(2.0 * math.log(2.0)) * 0.05
        assert fwhm(density) == pytest.approx(expected, abs=1e-4)

    def test_cyclic_invariance(self):
        grid = PositionGrid(512)
        density = (1.0 + np.cos(grid.values)) / TWO_PI
        base = fwhm(density)
        for shift in (1, 57, 301):
            assert fwhm(np.roll(density, shift)) == pytest.approx(base, abs=1e-12)

    def test_constant_density(self):
        with pytest.raises(UndefinedWidthError):
            fwhm(np.full(128, 0.5))

    def test_ambiguous_peaks(self):
        grid = PositionGrid(512)
        density = np.abs(np.cos(grid.values))  # two exact maxima
        with pytest.raises(AmbiguousPeakError) as err:
            fwhm(density)
        assert len(err.value.peaks) == 2

    def test_never_below_half(self):
        grid = PositionGrid(256)
        density = 10.0 + 0.1 * np.cos(grid.values)
        with pytest.raises(UndefinedWidthError):
            fwhm(density)


class TestCoherenceMoments:
    def test_vacuum_has_none(self):
        w = EnergyWindow(-3, 3)
        assert np.allclose(coherence_moments(vacuum(w), 4), 0.0)

    def test_two_level_superposition(self):
        moments = coherence_moments(balanced_superposition(), 1)
        assert moments[0] == pytest.approx(0.5)

    def test_bounded_by_one(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            rho = random_density(EnergyWindow(-4, 4), rng)
            moments = coherence_moments(rho, 8)
            assert np.all(np.abs(moments) <= 1.0 + 1e-12)

    def test_requires_room(self):
        with pytest.raises(ValueError):
            coherence_moments(balanced_superposition(), 2)
