"""Bayesian inversion of spectrograms.

Density matrices are parameterised by a real vector x of length 2 d^2
holding interleaved (real, imaginary) parts of a complex matrix A, with
rho = A A^dagger / Tr(A A^dagger).  The map is surjective onto physical
states and scale invariant, so the posterior over x combines the data
likelihood with an independent standard-normal prior on the components.

Sampling uses a Metropolis-Hastings chain whose proposal is a
curvature-informed preconditioned Crank-Nicolson step centred on the
maximum a posteriori point: q(x | x_j) = N(x_map + sqrt(1 - beta^2)
(x_j - x_map), beta^2 H^{-1}).  On an exactly Gaussian target N(x_map,
H^{-1}) the acceptance ratio cancels identically.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import ConvergenceWarning, CurvatureError, DegenerateInputError
from .ladder import ComplexMatrix, DensityMatrix, EnergyWindow
from .spectrogram import PROBABILITY_FLOOR, Spectrogram, sweep_amplitudes

DEFAULT_BETA = 0.02
DEFAULT_THINNING = 10
GRADIENT_TOLERANCE = 1e-6
MAX_MAP_STEPS = 100_000
ARMIJO_C = 1e-4
HESSIAN_JITTER_RELATIVE = 1e-8


def param_to_matrix(x: np.ndarray) -> np.ndarray:
    """Complex d x d matrix A from interleaved (re, im) parameter pairs."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size % 2:
        raise ValueError("parameter vector must be 1-D with even length")
    d = round(np.sqrt(x.size // 2))
    if 2 * d * d != x.size:
        raise ValueError(f"length {x.size} is not 2 d^2 for integer d")
    pairs = x.reshape(d, d, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]


def matrix_to_param(a: np.ndarray) -> np.ndarray:
    """Inverse layout of param_to_matrix."""
    a = np.asarray(a, dtype=np.complex128)
    out = np.empty(a.shape + (2,))
    out[..., 0] = a.real
    out[..., 1] = a.imag
    return out.reshape(-1)


def param_to_density(x: np.ndarray, window: EnergyWindow) -> DensityMatrix:
    """rho = A A^dagger / Tr(A A^dagger), physical for every nonzero x."""
    a = param_to_matrix(x)
    if window.dimension != a.shape[0]:
        raise ValueError("window dimension does not match parameter length")
    t = float(np.sum(np.abs(a) ** 2))
    if t == 0.0:
        raise DegenerateInputError("zero parameter vector has no direction")
    rho = (a @ a.conj().T) / t
    rho = (rho + rho.conj().T) / 2.0
    return DensityMatrix(ComplexMatrix(window, rho), validate=False)


class PosteriorModel:
    """Log posterior of density matrices given one spectrogram.

    ``state_window`` restricts the reconstruction to a sub-window of the
    data window (the state is zero-padded into the detection window).  With
    ``data=None`` the model is the bare prior, which is occasionally useful
    on its own; ``state_window`` is then mandatory.  ``prior`` is "normal"
    (standard normal on every component) or "flat".
    """

    def __init__(
        self,
        data: Spectrogram | None,
        state_window: EnergyWindow | None = None,
        prior: str = "normal",
        probability_floor: float = PROBABILITY_FLOOR,
    ):
        if prior not in ("normal", "flat"):
            raise ValueError(f"unknown prior {prior!r}")
        if data is None and state_window is None:
            raise ValueError("state_window is required for a pure-prior model")
        self.data = data
        self.state_window = state_window or data.window
        self.prior = prior
        self.probability_floor = float(probability_floor)
        d = self.state_window.dimension
        self.dimension = d
        self.n_parameters = 2 * d * d
        if data is not None:
            if not data.window.contains(self.state_window):
                raise ValueError("data window must contain the state window")
            amps = sweep_amplitudes(
                data.coupling_magnitude, data.phases, data.window, self.state_window
            )
            self._amps = np.ascontiguousarray(amps.reshape(-1, d))
            self._amps_conj = self._amps.conj()
            self._weights = np.ascontiguousarray(data.weights().ravel())
        else:
            self._amps = None
            self._weights = None

    # The likelihood term depends on x only through A A^dagger / Tr, so it is
    # exactly invariant under rescaling of x; optimisers must treat the
    # radial direction as a gauge degree of freedom.
    @property
    def scale_invariant(self) -> bool:
        return self.data is not None

    def _quadratic_forms(self, x: np.ndarray):
        a = param_to_matrix(x)
        t = float(x @ x)
        g = self._amps @ a
        q = (g.real**2 + g.imag**2).sum(axis=1)
        return a, t, g, q

    def log_posterior(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        val = 0.0
        if self.data is not None:
            _, t, _, q = self._quadratic_forms(x)
            if t == 0.0:
                raise DegenerateInputError("zero parameter vector")
            p = np.maximum(q / t, self.probability_floor)
            val += float(self._weights @ np.log(p))
        if self.prior == "normal":
            val -= 0.5 * float(x @ x)
        return val

    def grad_log_posterior(self, x: np.ndarray) -> np.ndarray:
        """Exact gradient assembled by the chain rule through A A^dagger / Tr."""
        x = np.asarray(x, dtype=float)
        grad = np.zeros_like(x)
        if self.data is not None:
            a, t, g, q = self._quadratic_forms(x)
            if t == 0.0:
                raise DegenerateInputError("zero parameter vector")
            p = q / t
            active = p > self.probability_floor
            coef = np.where(active, self._weights / np.maximum(q, 1e-300), 0.0)
            w_active = float(np.sum(self._weights[active]))
            # d q_k / dA = 2 conj(u_k) outer (u_k A); sum over bins first.
            gamma = 2.0 * (self._amps_conj * coef[:, None]).T @ g
            gamma -= (2.0 * w_active / t) * a
            grad += matrix_to_param(gamma)
        if self.prior == "normal":
            grad -= x
        return grad

    def hessian_log_posterior(self, x: np.ndarray) -> np.ndarray:
        """Exact Hessian of the log posterior (symmetric by construction)."""
        x = np.asarray(x, dtype=float)
        n = x.size
        hess = np.zeros((n, n))
        if self.data is not None:
            a, t, g, q = self._quadratic_forms(x)
            p = q / t
            active = p > self.probability_floor
            coef = np.where(active, self._weights / np.maximum(q, 1e-300), 0.0)
            w_active = float(np.sum(self._weights[active]))
            d = self.dimension
            # sum_k coef_k E_k with E_k = conj(u_k) outer u_k, then lift the
            # quadratic form q(x) = sum_cols a_c^dagger E a_c to parameter
            # space: same-column blocks [[Re E, -Im E], [Im E, Re E]].
            e_w = (self._amps_conj * coef[:, None]).T @ self._amps
            e_w = (e_w + e_w.conj().T) / 2.0
            er, ei = e_w.real, e_w.imag
            rows = np.arange(d)
            for c in range(d):
                re_idx = 2 * (rows * d + c)
                im_idx = re_idx + 1
                hess[np.ix_(re_idx, re_idx)] += 2.0 * er
                hess[np.ix_(im_idx, im_idx)] += 2.0 * er
                hess[np.ix_(re_idx, im_idx)] += -2.0 * ei
                hess[np.ix_(im_idx, re_idx)] += 2.0 * ei
            # rank-one corrections - sum_k w_k (grad q_k)(grad q_k)^T / q_k^2
            z = np.einsum("ka,kj->kaj", self._amps_conj, g)
            y = np.empty((z.shape[0], n))
            y[:, 0::2] = z.real.reshape(z.shape[0], -1)
            y[:, 1::2] = z.imag.reshape(z.shape[0], -1)
            scale = np.where(active, self._weights / np.maximum(q, 1e-300) ** 2, 0.0)
            hess -= 4.0 * (y.T * scale) @ y
            hess -= (2.0 * w_active / t) * np.eye(n)
            hess += (4.0 * w_active / t**2) * np.outer(x, x)
        if self.prior == "normal":
            hess -= np.eye(n)
        return hess


class GaussianModel:
    """Gaussian log-density N(mean, precision^{-1}) with the model interface."""

    def __init__(self, mean: np.ndarray, precision: np.ndarray):
        self.mean = np.asarray(mean, dtype=float)
        self.precision = np.asarray(precision, dtype=float)
        self.n_parameters = self.mean.size
        self.scale_invariant = False

    def log_posterior(self, x: np.ndarray) -> float:
        delta = np.asarray(x, dtype=float) - self.mean
        return -0.5 * float(delta @ self.precision @ delta)

    def grad_log_posterior(self, x: np.ndarray) -> np.ndarray:
        return -self.precision @ (np.asarray(x, dtype=float) - self.mean)

    def hessian_log_posterior(self, x: np.ndarray) -> np.ndarray:
        return -self.precision


@dataclass
class MapResult:
    """MAP point with the negative log-posterior curvature at that point."""

    x_map: np.ndarray
    hessian: np.ndarray
    log_posterior_at_map: float
    converged: bool
    gradient_inf_norm: float
    iterations: int
    chol_lower: np.ndarray = field(repr=False, default=None)
    cov_factor: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.chol_lower is None:
            self.chol_lower = np.linalg.cholesky(self.hessian)
        if self.cov_factor is None:
            # F with F F^T = H^{-1}: proposals are mean + beta * F z.
            eye = np.eye(self.hessian.shape[0])
            self.cov_factor = scipy.linalg.solve_triangular(self.chol_lower, eye, lower=True).T

    def gaussian_draw(self, rng: np.random.Generator) -> np.ndarray:
        """One sample from the Gaussian approximation N(x_map, H^{-1})."""
        return self.x_map + self.cov_factor @ rng.standard_normal(self.x_map.size)


class MhStep(NamedTuple):
    state: np.ndarray
    accepted: bool
    log_posterior: float


def _projected_gradient(model, x: np.ndarray, grad: np.ndarray) -> np.ndarray:
    if getattr(model, "scale_invariant", False):
        nx = np.linalg.norm(x)
        if nx > 0:
            unit = x / nx
            return grad - (grad @ unit) * unit
    return grad


def hessian_at_map(
    model,
    x_map: np.ndarray,
    jitter_relative: float = HESSIAN_JITTER_RELATIVE,
) -> np.ndarray:
    """H = -grad^2 log pi at the MAP, symmetrised and floored to be positive.

    Models exposing ``hessian_log_posterior`` are differentiated exactly;
    otherwise central differences of the gradient are used.  Eigenvalues
    below jitter_relative times the largest are raised by a diagonal shift
    so that a Cholesky factor always exists.
    """
    x_map = np.asarray(x_map, dtype=float)
    grad = model.grad_log_posterior(x_map)
    gnorm = float(np.max(np.abs(_projected_gradient(model, x_map, grad))))
    if gnorm > 1e-4:
        warnings.warn(
            f"Hessian requested away from stationarity (grad inf-norm {gnorm:.2e})",
            ConvergenceWarning,
            stacklevel=2,
        )
    if hasattr(model, "hessian_log_posterior"):
        h = -model.hessian_log_posterior(x_map)
    else:
        n = x_map.size
        h = np.empty((n, n))
        for i in range(n):
            step = 1e-5 * (1.0 + abs(x_map[i]))
            xp = x_map.copy()
            xm = x_map.copy()
            xp[i] += step
            xm[i] -= step
            h[:, i] = -(model.grad_log_posterior(xp) - model.grad_log_posterior(xm)) / (2 * step)
    h = (h + h.T) / 2.0
    eigs = np.linalg.eigvalsh(h)
    if eigs[-1] <= 0:
        raise CurvatureError(f"largest curvature eigenvalue is {eigs[-1]:.3e}")
    floor = jitter_relative * eigs[-1]
    if eigs[0] < floor:
        h = h + (floor - eigs[0]) * np.eye(h.shape[0])
    return h


def find_map(
    model,
    init: np.ndarray | None = None,
    gradient_tolerance: float = GRADIENT_TOLERANCE,
    max_steps: int = MAX_MAP_STEPS,
    seed: int = 0,
) -> MapResult:
    """Gradient ascent with a backtracking (Armijo) line search.

    The trial step length adapts between iterations by the Barzilai-Borwein
    secant rule, which copes with the poor conditioning that large count
    totals induce; halving with an Armijo test (c = 1e-4) keeps every
    accepted step an ascent step.

    For data models the likelihood is exactly flat along the radial gauge
    direction of the parameterisation while the prior always points to the
    origin; following the raw gradient would simply shrink |x| without
    changing the state.  The ascent therefore works on the sphere |x| =
    |init|: the gradient is projected tangentially and every step is
    retracted back to the initial radius.  Convergence is declared on the
    projected gradient.  Pure-prior models have no gauge and are optimised
    unconstrained.
    """
    if init is None:
        rng = np.random.default_rng(seed)
        init = rng.standard_normal(model.n_parameters)
    x = np.array(init, dtype=float)
    if x.size != model.n_parameters:
        raise ValueError("init has wrong length")
    gauge = getattr(model, "scale_invariant", False)
    radius = np.linalg.norm(x)
    if gauge and radius == 0.0:
        raise DegenerateInputError("cannot start data-model ascent at the origin")

    f = model.log_posterior(x)
    g = _projected_gradient(model, x, model.grad_log_posterior(x))
    step = 1.0
    converged = False
    gnorm = np.inf
    it = 0
    stalled = False
    for it in range(1, max_steps + 1):
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        if gnorm < gradient_tolerance:
            converged = True
            break
        g2 = float(g @ g)
        # near the optimum the predicted gain can sink below the float64
        # resolution of the objective; the allowance keeps the line search
        # from rejecting good steps on rounding noise
        noise = 8.0 * np.finfo(float).eps * (1.0 + abs(f))
        while True:
            cand = x + step * g
            if gauge:
                cand = cand * (radius / np.linalg.norm(cand))
            fc = model.log_posterior(cand)
            if fc >= f + ARMIJO_C * step * g2 - noise:
                break
            step /= 2.0
            if step < 1e-18:
                stalled = True
                break
        if stalled:
            break
        g_new = _projected_gradient(model, cand, model.grad_log_posterior(cand))
        dx = cand - x
        dg = g_new - g
        curvature = float(dx @ dg)
        step = float(dx @ dx) / (-curvature) if curvature < 0 else step * 2.0
        x, f, g = cand, fc, g_new

    if not converged:
        warnings.warn(
            f"MAP search stopped after {it} steps with gradient inf-norm {gnorm:.2e}",
            ConvergenceWarning,
            stacklevel=2,
        )
    hess = hessian_at_map(model, x)
    return MapResult(
        x_map=x,
        hessian=hess,
        log_posterior_at_map=f,
        converged=converged,
        gradient_inf_norm=gnorm,
        iterations=it,
    )


def pcn_propose(
    current: np.ndarray,
    map_result: MapResult,
    beta: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw from N(x_map + sqrt(1-beta^2)(x - x_map), beta^2 H^{-1})."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    contraction = np.sqrt(1.0 - beta * beta)
    mean = map_result.x_map + contraction * (np.asarray(current, float) - map_result.x_map)
    return mean + beta * (map_result.cov_factor @ rng.standard_normal(mean.size))


def _log_q(map_result: MapResult, beta: float, x: np.ndarray, given: np.ndarray) -> float:
    contraction = np.sqrt(1.0 - beta * beta)
    mean = map_result.x_map + contraction * (given - map_result.x_map)
    v = (x - mean) @ map_result.chol_lower
    return -0.5 * float(v @ v) / (beta * beta)


def mh_step(
    model,
    map_result: MapResult,
    beta: float,
    current: np.ndarray,
    rng: np.random.Generator,
    current_log_posterior: float | None = None,
) -> MhStep:
    """One Metropolis-Hastings update with the pCN proposal, in log space."""
    current = np.asarray(current, dtype=float)
    if current_log_posterior is None:
        current_log_posterior = model.log_posterior(current)
    proposal = pcn_propose(current, map_result, beta, rng)
    lp_prop = model.log_posterior(proposal)
    u = rng.uniform()
    if np.isnan(lp_prop):
        return MhStep(current, False, current_log_posterior)
    log_alpha = (
        lp_prop
        - current_log_posterior
        + _log_q(map_result, beta, current, proposal)
        - _log_q(map_result, beta, proposal, current)
    )
    if np.log(u) < min(0.0, log_alpha):
        return MhStep(proposal, True, lp_prop)
    return MhStep(current, False, current_log_posterior)


@dataclass
class ChainRecord:
    """Thinned parameter samples plus acceptance bookkeeping for one chain."""

    samples: np.ndarray
    acceptance_count: int
    proposal_count: int
    seed: int
    beta: float
    thinning: int = DEFAULT_THINNING
    window: EnergyWindow | None = None

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if self.acceptance_count > self.proposal_count:
            raise ValueError("acceptance count cannot exceed proposal count")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")

    @property
    def acceptance_rate(self) -> float:
        return self.acceptance_count / max(self.proposal_count, 1)

    def retained(self, burn_in: int) -> np.ndarray:
        """Samples after discarding the first ``burn_in`` pre-thinning steps."""
        skip = -(-burn_in // self.thinning)  # ceil division
        return self.samples[skip:]


def run_chains(
    model,
    map_result: MapResult,
    beta: float = DEFAULT_BETA,
    n_chains: int = 4,
    n_samples: int = 100_000,
    thinning: int = DEFAULT_THINNING,
    seeds=None,
) -> list[ChainRecord]:
    """Independent MH chains started from the Gaussian approximation.

    ``n_samples`` counts Metropolis-Hastings proposals per chain; every
    ``thinning``-th state is stored.  Chain i is fully determined by
    seeds[i].
    """
    if n_chains < 1:
        raise ValueError("need at least one chain")
    if seeds is None:
        seeds = list(range(n_chains))
    seeds = [int(s) for s in seeds]
    if len(seeds) != n_chains:
        raise ValueError("need one seed per chain")
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    window = getattr(model, "state_window", None)
    records = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        x = map_result.gaussian_draw(rng)
        lp = model.log_posterior(x)
        kept = []
        accepted = 0
        for step in range(1, n_samples + 1):
            x, ok, lp = mh_step(model, map_result, beta, x, rng, lp)
            accepted += ok
            if step % thinning == 0:
                kept.append(x)
        records.append(
            ChainRecord(
                samples=np.array(kept),
                acceptance_count=accepted,
                proposal_count=n_samples,
                seed=seed,
                beta=beta,
                thinning=thinning,
                window=window,
            )
        )
    return records
