"""Discrete-periodic phase space: Wigner tables, temporal densities, widths.

Energy eigenstates carry integer momentum p while the conjugate position x
lives on the unit circle (one optical period maps to 2 pi).  The Wigner
function of a state rho then has the closed form

    W(x, p) = (1 / (2 pi)^2) sum_{N,M} rho_{NM} e^{i (N-M) x} K(p - (N+M)/2)

with K(0) = 2 pi, K(k) = 0 for nonzero integers and K(k) = 2 sin(pi k) / k
at half-integer arguments.  Summed over all integer momenta the kernel
totals 2 pi for every (N, M), which is what makes the position marginal
come out right; the slowly decaying half-integer tail outside any finite
momentum window is accumulated in closed form via the Nielsen beta
function rather than truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import psi as _digamma

from .errors import AmbiguousPeakError, DimensionMismatchError, UndefinedWidthError
from .ladder import DensityMatrix, EnergyWindow

DEFAULT_GRID_POINTS = 1024

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PositionGrid:
    """Uniform circular grid x_k = -pi + 2 pi k / n, k = 0..n-1."""

    n_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if self.n_points < 64:
            raise ValueError("position grid needs at least 64 points")

    @property
    def values(self) -> np.ndarray:
        return -math.pi + _TWO_PI * np.arange(self.n_points) / self.n_points


@dataclass(frozen=True)
class WignerTable:
    """Real W(x, p) values on a position grid times an integer momentum window."""

    grid: PositionGrid
    momenta: EnergyWindow
    values: np.ndarray
    position_marginal: np.ndarray

    def momentum_marginal(self) -> np.ndarray:
        """integral dx W(x, p) = <p|rho|p>; exact for the stored table.

        The measures conjugate to each other are the plain sum over integer
        momenta and the plain dx integral over the circle: under those the
        table integrates to one and both marginals recover the state.
        """
        return self.values.mean(axis=0) * _TWO_PI

    def normalization(self) -> float:
        """integral dx sum_p W(x, p) over the stored momenta."""
        return float(self.momentum_marginal().sum())


def _kernel(kappa: np.ndarray) -> np.ndarray:
    """K(kappa) = integral_{-pi}^{pi} e^{i kappa y} dy on the half-integer lattice."""
    out = np.zeros_like(kappa, dtype=float)
    zero = np.abs(kappa) < 1e-12
    out[zero] = _TWO_PI
    nz = ~zero
    out[nz] = 2.0 * np.sin(math.pi * kappa[nz]) / kappa[nz]
    return out


def _nielsen_beta(a: np.ndarray) -> np.ndarray:
    """sum_{k>=0} (-1)^k / (k + a) for a > 0."""
    return 0.5 * (_digamma((a + 1.0) / 2.0) - _digamma(a / 2.0))


def _kernel_tail(h: np.ndarray, p_lo: int, p_hi: int) -> np.ndarray:
    """sum of K(p - h) over integers p outside [p_lo, p_hi], in closed form."""
    sign_hi = -1.0 if (p_hi + 1) % 2 else 1.0
    sign_lo = -1.0 if (p_lo - 1) % 2 else 1.0
    s = sign_hi * _nielsen_beta(p_hi + 1.0 - h) - sign_lo * _nielsen_beta(1.0 + h - p_lo)
    return -2.0 * np.sin(math.pi * h) * s


def wigner(
    rho: DensityMatrix,
    grid: PositionGrid | None = None,
    momenta: EnergyWindow | None = None,
) -> WignerTable:
    """Wigner table of a state, evaluated by the closed-form kernel.

    ``momenta`` defaults to the state's own window and must contain it.
    The stored ``position_marginal`` is the full momentum sum including the
    closed-form tail beyond the table, so it reproduces <x|rho|x> to
    rounding accuracy.
    """
    grid = grid or PositionGrid()
    momenta = momenta or rho.window
    if not momenta.contains(rho.window):
        raise DimensionMismatchError("momentum window must contain the state window")
    idx = rho.window.indices
    arr = rho.array
    x = grid.values
    p = momenta.indices.astype(float)

    deltas = np.arange(-(rho.dimension - 1), rho.dimension)
    e = np.exp(1j * np.multiply.outer(x, deltas))  # (n_x, n_delta)

    # C[delta, p] collects rho_{NM} K(p - (N+M)/2) over pairs with N - M = delta.
    c = np.zeros((deltas.size, p.size), dtype=np.complex128)
    c_tail = np.zeros(deltas.size, dtype=np.complex128)
    for a, n_val in enumerate(idx):
        for b, m_val in enumerate(idx):
            coeff = arr[a, b]
            if coeff == 0:
                continue
            di = (n_val - m_val) + (rho.dimension - 1)
            h = 0.5 * (n_val + m_val)
            c[di] += coeff * _kernel(p - h)
            if (n_val + m_val) % 2:
                c_tail[di] += coeff * _kernel_tail(np.array([h]), momenta.n_min, momenta.n_max)[0]

    table = (e @ c) / (_TWO_PI**2)
    resid = float(np.max(np.abs(table.imag))) if table.size else 0.0
    if resid > 1e-12:
        raise ValueError(f"Wigner table has imaginary residue {resid:.3e}")
    marginal = table.real.sum(axis=1) + (e @ c_tail).real / (_TWO_PI**2)
    return WignerTable(grid=grid, momenta=momenta, values=table.real, position_marginal=marginal)


def temporal_density(rho: DensityMatrix, grid: PositionGrid | None = None) -> np.ndarray:
    """<x|rho|x> = (1 / 2 pi) sum_{N,M} rho_{NM} e^{i (N-M) x} on the grid."""
    grid = grid or PositionGrid()
    d = rho.dimension
    ks = np.arange(-(d - 1), d)
    coeffs = np.array([np.trace(rho.array, offset=-k) for k in ks])
    vals = np.exp(1j * np.multiply.outer(grid.values, ks)) @ coeffs / _TWO_PI
    density = vals.real
    if density.min() < -1e-10:
        raise ValueError(f"temporal density has negative value {density.min():.3e}")
    return density


def coherence_moments(rho: DensityMatrix, n_max: int) -> np.ndarray:
    """Ladder moments <b^n> = sum_N rho_{N, N-n} for n = 1..n_max.

    Each moment is a sub-diagonal sum of the density matrix and is bounded
    by 1 in modulus; |<b>| sets the interference visibility of coherent
    cathodoluminescence against an optimised local oscillator.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if n_max >= rho.dimension:
        raise ValueError(
            f"n_max = {n_max} needs a window larger than {rho.dimension} states"
        )
    return np.array([np.trace(rho.array, offset=-n) for n in range(1, n_max + 1)])


def fwhm(density) -> float:
    """Full width at half maximum of a periodic density, as a period fraction.

    Walks from the unique global maximum to the half-maximum crossings on
    either side and interpolates linearly.  Raises UndefinedWidthError for
    flat profiles or profiles that never fall below half maximum, and
    AmbiguousPeakError when several samples tie for the maximum.
    """
    d = np.asarray(density, dtype=float)
    n = d.size
    if n < 2:
        raise UndefinedWidthError("density needs at least two samples")
    top = d.max()
    if top <= d.min() or top <= 0:
        raise UndefinedWidthError("density is constant")
    peaks = np.flatnonzero(d == top)
    if peaks.size > 1:
        raise AmbiguousPeakError(
            f"{peaks.size} samples tie for the global maximum", peaks.tolist()
        )
    peak = int(peaks[0])
    half = top / 2.0

    def walk(direction: int) -> float:
        prev = top
        for step in range(1, n):
            cur = d[(peak + direction * step) % n]
            if cur < half:
                # linear interpolation between the straddling samples
                return (step - 1) + (prev - half) / (prev - cur)
            prev = cur
        raise UndefinedWidthError("density never falls below half maximum")

    width_steps = walk(+1) + walk(-1)
    return width_steps / n
