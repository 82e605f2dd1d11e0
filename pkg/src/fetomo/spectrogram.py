"""Phase-swept electron energy spectrograms.

A tomography sweep applies the laser interaction at fixed magnitude but
varying optical phase phi and records the energy spectrum for each phase.
The resulting table S(phi, N) is the data object every reconstruction
algorithm consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatchError
from .ladder import Coupling, DensityMatrix, EnergyWindow, bessel_offsets

# Expected probabilities below this value are clamped before logarithms and
# divisions; keeps the likelihood machinery total without biasing
# well-supported bins.
PROBABILITY_FLOOR = 1e-12

DEFAULT_PHASE_COUNT = 100


@dataclass(frozen=True)
class PhaseGrid:
    """Strictly increasing optical phases in [0, 2 pi)."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("phase grid needs at least one value")
        if np.any(arr < 0.0) or np.any(arr >= 2.0 * math.pi):
            raise ValueError("phases must lie in [0, 2 pi)")
        if arr.size > 1 and np.any(np.diff(arr) <= 0):
            raise ValueError("phases must be strictly increasing")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def uniform(cls, count: int = DEFAULT_PHASE_COUNT) -> "PhaseGrid":
        if count < 1:
            raise ValueError("phase count must be >= 1")
        return cls(np.linspace(0.0, 2.0 * math.pi, count, endpoint=False))

    @property
    def count(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class Spectrogram:
    """Counts (or expected probabilities) on a phase grid x energy window.

    ``counts`` holds one row per phase.  When the rows are per-phase
    normalised frequencies rather than raw counts, ``total_per_phase``
    declares the implied number of detection events per phase so that
    likelihood exponents stay correctly scaled.
    """

    window: EnergyWindow
    phases: PhaseGrid
    counts: np.ndarray
    coupling_magnitude: float
    total_per_phase: float | None = None

    def __post_init__(self):
        arr = np.array(self.counts, dtype=float)
        expected = (self.phases.count, self.window.dimension)
        if arr.shape != expected:
            raise DimensionMismatchError(
                f"counts shape {arr.shape} does not match phases x window {expected}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("counts must be finite")
        if np.any(arr < 0):
            raise ValueError("counts must be >= 0")
        if not np.any(arr > 0):
            raise ValueError("spectrogram must have at least one positive entry")
        if self.coupling_magnitude < 0:
            raise ValueError("coupling magnitude must be >= 0")
        if self.total_per_phase is not None and self.total_per_phase <= 0:
            raise ValueError("declared total_per_phase must be positive")
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    def weights(self) -> np.ndarray:
        """Likelihood exponents: raw counts, or frequencies times declared total."""
        if self.total_per_phase is None:
            return self.counts
        return self.counts * float(self.total_per_phase)


def sweep_amplitudes(
    g_abs: float,
    phases: PhaseGrid,
    out_window: EnergyWindow,
    in_window: EnergyWindow,
) -> np.ndarray:
    """Transition amplitudes <N| U_phi |a> of the swept interaction.

    Returns a complex array of shape (phases, out_window, in_window) with
    entry (f, N, a) = J_{N-a}(2 g_abs) e^{i (N-a) phi_f}.  Each entry is an
    exact matrix element of the untruncated interaction, so no padding is
    needed for downstream contractions.
    """
    out_idx = out_window.indices
    in_idx = in_window.indices
    offs = out_idx[:, None] - in_idx[None, :]
    j = bessel_offsets(offs.ravel(), 2.0 * g_abs).reshape(offs.shape)
    phase_factors = np.exp(1j * np.multiply.outer(phases.values, offs))
    return j[None, :, :] * phase_factors


def expected_probabilities(
    window: EnergyWindow,
    g_abs: float,
    phases: PhaseGrid,
    rho: DensityMatrix,
) -> np.ndarray:
    """Detection probabilities p(phi, N) = <N| U_phi rho U_phi^dagger |N>.

    ``rho`` may live on a sub-window of ``window``; it is implicitly
    zero-padded.  Rows sum to one minus whatever probability leaks past the
    detection window.
    """
    if not window.contains(rho.window):
        raise DimensionMismatchError("detection window does not contain the state window")
    amps = sweep_amplitudes(g_abs, phases, window, rho.window)
    tmp = amps @ rho.array
    p = np.einsum("fnb,fnb->fn", tmp, amps.conj()).real
    return np.clip(p, 0.0, None)


def simulate_spectrogram(
    rho: DensityMatrix,
    coupling_magnitude: float,
    phases: PhaseGrid,
    window: EnergyWindow | None = None,
) -> Spectrogram:
    """Noise-free spectrogram of expected probabilities.

    The output window defaults to the state's own window and must be wide
    enough to absorb the Bessel spread 2|g| if the rows are to sum to one;
    use sample_counts to convert the probabilities into shot-noise counts.
    """
    if coupling_magnitude < 0:
        raise ValueError("coupling magnitude must be >= 0")
    out_window = window or rho.window
    p = expected_probabilities(out_window, coupling_magnitude, phases, rho)
    return Spectrogram(out_window, phases, p, coupling_magnitude)


def sample_counts(
    s: Spectrogram,
    total_per_phase: int,
    seed: int,
    noiseless: bool = False,
) -> Spectrogram:
    """Multinomial shot noise applied row by row to a probability spectrogram.

    With ``noiseless=True`` the expected counts total * p are returned
    exactly instead of being sampled.  Deterministic for a given seed.
    """
    if total_per_phase <= 0:
        raise ValueError("total_per_phase must be a positive integer")
    rows = s.counts
    sums = rows.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-6):
        raise ValueError("rows must be probabilities summing to 1 within 1e-6")
    probs = rows / sums[:, None]
    if noiseless:
        counts = probs * float(total_per_phase)
    else:
        rng = np.random.default_rng(seed)
        counts = np.empty_like(probs)
        for i in range(probs.shape[0]):
            counts[i] = rng.multinomial(int(total_per_phase), probs[i])
    return Spectrogram(s.window, s.phases, counts, s.coupling_magnitude)


def log_likelihood(s: Spectrogram, rho: DensityMatrix) -> float:
    """Log-likelihood sum_{phi,N} S(phi,N) log p_{phi,N}(rho).

    Probabilities are floored at PROBABILITY_FLOOR, so the value is finite
    for every physical state.
    """
    p = expected_probabilities(s.window, s.coupling_magnitude, s.phases, rho)
    p = np.maximum(p, PROBABILITY_FLOOR)
    return float(np.sum(s.weights() * np.log(p)))


def phase_shifted(rho: DensityMatrix, phi0: float) -> DensityMatrix:
    """Conjugate rho by e^{-i phi0 N}, rotating its spectrogram in phase."""
    idx = rho.window.indices
    u = np.exp(-1j * phi0 * idx)
    return DensityMatrix.from_array(
        rho.window, (u[:, None] * rho.array) * u.conj()[None, :], validate=False
    )
