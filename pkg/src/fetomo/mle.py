"""Maximum-likelihood reconstruction by the R rho R fixed-point iteration.

Each sweep datum (phi, N) contributes a projector onto the back-propagated
detection state U_phi^dagger |N><N| U_phi.  Reweighting those projectors by
measured-over-predicted counts gives the R operator whose fixed point is
the maximum-likelihood state; iterating rho <- R rho R / Tr keeps the state
physical at every step.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceWarning
from .ladder import ComplexMatrix, DensityMatrix, EnergyWindow
from .spectrogram import PROBABILITY_FLOOR, Spectrogram, sweep_amplitudes


@dataclass(frozen=True)
class MleConfig:
    """Iteration controls.

    ``dilution`` blends R with the identity, R~ = (1 - dilution) (Tr R / d) I
    + dilution R.  The undiluted map (dilution = 1) is fastest but not
    guaranteed monotone; when a step lowers the log-likelihood it is retried
    at dilution 0.5 for the rest of the run.
    """

    max_iterations: int = 5000
    log_likelihood_tolerance: float = 1e-10
    dilution: float = 1.0
    initial_state: DensityMatrix | str = "maximally-mixed"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.log_likelihood_tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if not 0.0 < self.dilution <= 1.0:
            raise ValueError("dilution must lie in (0, 1]")
        if isinstance(self.initial_state, str) and self.initial_state != "maximally-mixed":
            raise ValueError(f"unknown initial state {self.initial_state!r}")


@dataclass
class MleResult:
    density: DensityMatrix
    log_likelihood_trace: np.ndarray
    converged: bool
    iterations: int
    dilution_used: float


def _flat_amplitudes(s: Spectrogram, window: EnergyWindow) -> np.ndarray:
    amps = sweep_amplitudes(s.coupling_magnitude, s.phases, s.window, window)
    return amps.reshape(-1, window.dimension)


def _probabilities(amps_flat: np.ndarray, rho_arr: np.ndarray) -> np.ndarray:
    g = amps_flat @ rho_arr
    p = np.real(g * amps_flat.conj()).sum(axis=1)
    return np.maximum(p, PROBABILITY_FLOOR)


def r_operator(s: Spectrogram, rho: DensityMatrix) -> ComplexMatrix:
    """R = sum_{phi,N} [S(phi,N) / p_{phi,N}(rho)] U_phi^dagger |N><N| U_phi.

    Hermitian by construction (real weights on Hermitian projectors); the
    tiny anti-Hermitian rounding residue is removed before returning.
    """
    amps = _flat_amplitudes(s, rho.window)
    p = _probabilities(amps, rho.array)
    coef = s.weights().ravel() / p
    r = (amps.conj() * coef[:, None]).T @ amps
    r = (r + r.conj().T) / 2.0
    return ComplexMatrix(rho.window, r)


def mle_reconstruct(
    s: Spectrogram,
    config: MleConfig | None = None,
    window: EnergyWindow | None = None,
    callback=None,
) -> MleResult:
    """Iterate rho <- R~ rho R~ / Tr(R~ rho R~) until the likelihood settles.

    ``window`` selects the reconstruction window (default: the data window).
    Stops when the relative log-likelihood change falls below the configured
    tolerance; returns the best iterate with a ConvergenceWarning otherwise.
    ``callback(iteration, rho_array, log_likelihood)`` is invoked per iterate.
    """
    config = config or MleConfig()
    if isinstance(config.initial_state, DensityMatrix):
        rho = config.initial_state
        if window is not None and window != rho.window:
            raise ValueError("window argument conflicts with the initial state window")
    else:
        rho = DensityMatrix.maximally_mixed(window or s.window)

    amps = _flat_amplitudes(s, rho.window)
    weights = s.weights().ravel()
    d = rho.dimension
    eye = np.eye(d)

    arr = rho.array.copy()
    lam = config.dilution
    p = _probabilities(amps, arr)
    ll = float(weights @ np.log(p))
    trace = [ll]
    if callback is not None:
        callback(0, arr, ll)

    converged = False
    iterations = 0
    for it in range(1, config.max_iterations + 1):
        coef = weights / p
        r = (amps.conj() * coef[:, None]).T @ amps
        r = (r + r.conj().T) / 2.0
        while True:
            if lam < 1.0:
                r_eff = (1.0 - lam) * (np.trace(r).real / d) * eye + lam * r
            else:
                r_eff = r
            cand = r_eff @ arr @ r_eff
            cand /= np.trace(cand).real
            cand = (cand + cand.conj().T) / 2.0
            p_cand = _probabilities(amps, cand)
            ll_cand = float(weights @ np.log(p_cand))
            if ll_cand >= ll - 1e-9 or lam <= 0.5:
                break
            # Undiluted step lowered the likelihood: discard it and fall
            # back to the damped map for the rest of the run.
            lam = 0.5
        arr, p, ll_prev, ll = cand, p_cand, ll, ll_cand
        trace.append(ll)
        iterations = it
        if callback is not None:
            callback(it, arr, ll)
        if abs(ll - ll_prev) <= config.log_likelihood_tolerance * max(1.0, abs(ll)):
            converged = True
            break

    if not converged:
        warnings.warn(
            f"likelihood not settled after {config.max_iterations} iterations",
            ConvergenceWarning,
            stacklevel=2,
        )
    density = DensityMatrix.from_array(rho.window, arr, validate=False)
    return MleResult(
        density=density,
        log_likelihood_trace=np.array(trace),
        converged=converged,
        iterations=iterations,
        dilution_used=lam,
    )
