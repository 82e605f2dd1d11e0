"""Convergence diagnostics and posterior summaries over stored chains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bayes import ChainRecord, param_to_matrix
from .errors import UndefinedStatisticError
from .ladder import ComplexMatrix, DensityMatrix

DEFAULT_BURN_IN = 20_000  # pre-thinning steps discarded before summarising


def gelman_rubin(chains) -> float:
    """Potential scale reduction factor over >= 2 equal-length scalar series.

    R_hat = sqrt((n-1)/n + B/(n W)) with B the between-chain and W the
    within-chain variance; exactly sqrt((n-1)/n) when the chains agree.
    """
    series = [np.asarray(c, dtype=float) for c in chains]
    if len(series) < 2:
        raise ValueError("need at least two chains")
    n = series[0].size
    if any(s.size != n for s in series):
        raise ValueError("chains must have equal length")
    if n < 10:
        raise ValueError("chains must have length >= 10")
    means = np.array([s.mean() for s in series])
    variances = np.array([s.var(ddof=1) for s in series])
    w = variances.mean()
    if w == 0.0:
        raise UndefinedStatisticError("zero within-chain variance")
    b = n * means.var(ddof=1)
    return float(np.sqrt((n - 1) / n + b / (n * w)))


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Normalised autocorrelation at lags 0..max_lag (biased estimator)."""
    x = np.asarray(series, dtype=float)
    if x.size <= 2 * max_lag:
        raise ValueError("series length must exceed twice the maximum lag")
    x = x - x.mean()
    c0 = float(x @ x) / x.size
    if c0 == 0.0:
        raise UndefinedStatisticError("constant series has no autocorrelation")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = (float(x[:-k] @ x[k:]) / x.size) / c0
    return out


@dataclass
class PosteriorSummary:
    """Entrywise posterior mean and spread plus named scalar traces.

    ``scalar_traces`` maps a name to an array of shape (n_chains, n_kept)
    so that per-chain diagnostics remain possible after summarising.
    """

    mean_density: DensityMatrix
    std_real: np.ndarray
    std_imag: np.ndarray
    scalar_traces: dict


def _retained_stacks(chains: list[ChainRecord], burn_in: int):
    if not chains:
        raise ValueError("no chains given")
    window = chains[0].window
    if window is None:
        raise ValueError("chains carry no energy window")
    kept = [c.retained(burn_in) for c in chains]
    n_keep = min(k.shape[0] for k in kept)
    if n_keep == 0:
        raise ValueError("burn-in discards every stored sample")
    kept = [k[:n_keep] for k in kept]
    return window, kept


def density_samples(record_samples: np.ndarray, window) -> np.ndarray:
    """Map stored parameter vectors to density-matrix arrays, shape (n, d, d)."""
    d = window.dimension
    a = np.empty((record_samples.shape[0], d, d), dtype=np.complex128)
    for i, x in enumerate(record_samples):
        a[i] = param_to_matrix(x)
    prod = a @ a.conj().transpose(0, 2, 1)
    traces = np.einsum("nii->n", prod).real
    return prod / traces[:, None, None]


def posterior_summary(
    chains: list[ChainRecord],
    burn_in: int = DEFAULT_BURN_IN,
    model=None,
) -> PosteriorSummary:
    """Pool retained samples into an entrywise mean and standard deviation.

    ``burn_in`` is counted in pre-thinning steps, mirroring how chains are
    recorded.  When ``model`` is given a per-sample log-posterior trace is
    included alongside the zero-loss occupation.
    """
    window, kept = _retained_stacks(chains, burn_in)
    stacks = [density_samples(k, window) for k in kept]
    pooled = np.concatenate(stacks, axis=0)
    mean = pooled.mean(axis=0)
    mean = (mean + mean.conj().T) / 2.0
    std_real = pooled.real.std(axis=0)
    std_imag = pooled.imag.std(axis=0)

    traces: dict = {}
    i0 = window.index_of(0)
    traces["zero_loss"] = np.array([s[:, i0, i0].real for s in stacks])
    if model is not None:
        traces["log_posterior"] = np.array(
            [[model.log_posterior(x) for x in k] for k in kept]
        )
    return PosteriorSummary(
        mean_density=DensityMatrix(ComplexMatrix(window, mean), validate=False),
        std_real=std_real,
        std_imag=std_imag,
        scalar_traces=traces,
    )


def gelman_rubin_map(chains: list[ChainRecord], burn_in: int = DEFAULT_BURN_IN) -> dict:
    """R_hat for every density-matrix entry (re/im) and the zero-loss occupation."""
    window, kept = _retained_stacks(chains, burn_in)
    stacks = [density_samples(k, window) for k in kept]
    d = window.dimension
    out = {}
    for i in range(d):
        for j in range(d):
            ni = window.n_min + i
            nj = window.n_min + j
            out[f"re[{ni},{nj}]"] = gelman_rubin([s[:, i, j].real for s in stacks])
            if i != j:
                out[f"im[{ni},{nj}]"] = gelman_rubin([s[:, i, j].imag for s in stacks])
    i0 = window.index_of(0)
    out["zero_loss"] = gelman_rubin([s[:, i0, i0].real for s in stacks])
    return out
