"""Ladder-space linear algebra for photon-exchange energy states.

The single-electron Hilbert space is spanned by an integer index N counting
net photons exchanged with the light field.  A laser interaction of complex
strength g = |g| e^{i arg g} shifts population between neighbouring indices;
its matrix elements in the energy basis are Bessel functions of the first
kind evaluated at 2|g|.  Everything here is a pure function of immutable
values and safe to share across threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError, TruncationWarning

# Float64 noise budget for physicality checks.
HERMITICITY_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10
TRACE_TOL = 1e-10

# Power series below this argument, downward (Miller) recurrence above.
# The series develops ~1e-11 cancellation error by x ~ 15, so the switch
# sits well inside the safe region.
_SERIES_X_MAX = 8.0


@dataclass(frozen=True)
class EnergyWindow:
    """Contiguous range [n_min, n_max] of photon-exchange indices."""

    n_min: int
    n_max: int

    def __post_init__(self):
        if not (self.n_min <= 0 <= self.n_max):
            raise ValueError(
                f"energy window must contain index 0, got [{self.n_min}, {self.n_max}]"
            )

    @property
    def dimension(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def index_of(self, n: int) -> int:
        """Array offset of energy index n inside this window."""
        if not self.n_min <= n <= self.n_max:
            raise DimensionMismatchError(f"index {n} outside window [{self.n_min}, {self.n_max}]")
        return n - self.n_min

    def contains(self, other: "EnergyWindow") -> bool:
        return self.n_min <= other.n_min and other.n_max <= self.n_max

    def padded(self, extra: int) -> "EnergyWindow":
        return EnergyWindow(self.n_min - extra, self.n_max + extra)


@dataclass(frozen=True)
class Coupling:
    """Complex interaction strength g = magnitude * e^{i phase}."""

    magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError(f"coupling magnitude must be >= 0, got {self.magnitude}")
        object.__setattr__(self, "phase", float(self.phase) % (2.0 * math.pi))
        object.__setattr__(self, "magnitude", float(self.magnitude))

    @classmethod
    def from_complex(cls, g: complex) -> "Coupling":
        return cls(abs(g), math.atan2(g.imag, g.real))

    @property
    def value(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))

    def swept(self, phi: float) -> "Coupling":
        """The same interaction with the optical phase advanced by phi."""
        return Coupling(self.magnitude, self.phase + phi)


@dataclass(frozen=True)
class ComplexMatrix:
    """Dense complex matrix attached to an energy window."""

    window: EnergyWindow
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.complex128)
        d = self.window.dimension
        if arr.shape != (d, d):
            raise DimensionMismatchError(
                f"expected a {d}x{d} matrix for window "
                f"[{self.window.n_min}, {self.window.n_max}], got shape {arr.shape}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def dimension(self) -> int:
        return self.window.dimension


class DensityMatrix:
    """Hermitian, positive-semidefinite, unit-trace matrix on an energy window."""

    def __init__(self, matrix: ComplexMatrix, validate: bool = True):
        self.matrix = matrix
        if validate:
            arr = matrix.entries
            herm = np.max(np.abs(arr - arr.conj().T))
            if herm > HERMITICITY_TOL:
                raise ValueError(f"not Hermitian: max |rho - rho^dagger| = {herm:.3e}")
            tr = np.trace(arr).real
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValueError(f"trace must be 1, got {tr!r}")
            lo = np.linalg.eigvalsh((arr + arr.conj().T) / 2.0)[0]
            if lo < EIGENVALUE_FLOOR:
                raise ValueError(f"negative eigenvalue {lo:.3e} below floor {EIGENVALUE_FLOOR}")

    @classmethod
    def from_array(cls, window: EnergyWindow, entries, validate: bool = True) -> "DensityMatrix":
        return cls(ComplexMatrix(window, entries), validate=validate)

    @classmethod
    def maximally_mixed(cls, window: EnergyWindow) -> "DensityMatrix":
        d = window.dimension
        return cls(ComplexMatrix(window, np.eye(d) / d), validate=False)

    @classmethod
    def pure(cls, window: EnergyWindow, amplitudes) -> "DensityMatrix":
        """Projector onto a normalised state vector given in the window basis."""
        psi = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise DegenerateInputError("zero state vector")
        psi = psi / norm
        return cls(ComplexMatrix(window, np.outer(psi, psi.conj())), validate=False)

    @property
    def window(self) -> EnergyWindow:
        return self.matrix.window

    @property
    def array(self) -> np.ndarray:
        return self.matrix.entries

    @property
    def dimension(self) -> int:
        return self.matrix.window.dimension

    def occupation(self, n: int) -> float:
        """Population <n|rho|n> of energy index n."""
        i = self.window.index_of(n)
        return float(self.array[i, i].real)

    def embedded(self, window: EnergyWindow) -> "DensityMatrix":
        """The same state on a larger window, zero-padded."""
        if not window.contains(self.window):
            raise DimensionMismatchError("target window does not contain the state window")
        d = window.dimension
        out = np.zeros((d, d), dtype=np.complex128)
        a = window.index_of(self.window.n_min)
        b = a + self.dimension
        out[a:b, a:b] = self.array
        return DensityMatrix(ComplexMatrix(window, out), validate=False)


def _bessel_series(n: int, x: float) -> float:
    # J_n(x) = sum_k (-1)^k (x/2)^{n+2k} / (k! (n+k)!), safe for x < 8 where
    # the alternating terms never grow enough to cause cancellation.
    try:
        term = (x / 2.0) ** n / math.factorial(n)
    except OverflowError:
        return 0.0
    if term == 0.0:
        return 0.0
    total = term
    k = 0
    while True:
        k += 1
        term *= -(x * x / 4.0) / (k * (n + k))
        total += term
        if abs(term) < 1e-18 * max(1.0, abs(total)) or k > 300:
            return total


def _bessel_row(n_top: int, x: float) -> np.ndarray:
    """J_0(x), ..., J_{n_top}(x) for x >= 0."""
    row = np.zeros(n_top + 1)
    if x == 0.0:
        row[0] = 1.0
        return row
    if x < _SERIES_X_MAX:
        for n in range(n_top + 1):
            row[n] = _bessel_series(n, x)
        return row
    # Miller's downward recurrence, normalised with J_0 + 2 sum J_{2k} = 1.
    m = max(n_top, int(x)) + 1
    m += int(16 + 2.0 * math.sqrt(m))
    if m % 2:
        m += 1
    vals = np.zeros(m + 1)
    jp, j = 0.0, 1e-300
    vals[m] = j
    for k in range(m, 0, -1):
        jm = (2.0 * k / x) * j - jp
        jp, j = j, jm
        vals[k - 1] = j
        if abs(j) > 1e250:
            vals[k - 1 :] /= 1e250
            jp /= 1e250
            j = vals[k - 1]
    norm = vals[0] + 2.0 * np.sum(vals[2::2])
    return vals[: n_top + 1] / norm


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind J_n(x) for integer n and x >= 0.

    Uses the power series for small arguments and Miller's downward
    recurrence otherwise.  Orders far beyond the |n| ~ 10 + 2x contract
    boundary are below 1e-40 and short-circuit to 0.
    """
    if x < 0:
        raise ValueError(f"argument must be >= 0, got {x}")
    n = int(n)
    sign = 1.0
    if n < 0:
        n = -n
        if n % 2:
            sign = -1.0
    if n > 30 + 2 * x:
        return 0.0
    if x == 0.0:
        return sign if n == 0 else 0.0
    if x < _SERIES_X_MAX:
        return sign * _bessel_series(n, x)
    return sign * float(_bessel_row(n, x)[n])


def bessel_offsets(offsets: np.ndarray, x: float) -> np.ndarray:
    """J_k(x) for an integer array of orders k, using J_{-n} = (-1)^n J_n."""
    offsets = np.asarray(offsets, dtype=int)
    top = int(np.max(np.abs(offsets))) if offsets.size else 0
    row = _bessel_row(top, x)
    vals = row[np.abs(offsets)]
    neg_odd = (offsets < 0) & (np.abs(offsets) % 2 == 1)
    return np.where(neg_odd, -vals, vals)


def interaction_unitary(g: Coupling, window: EnergyWindow) -> ComplexMatrix:
    """Energy-basis matrix of the laser interaction exp(g b^dagger - conj(g) b).

    Entry (N, M) is J_{N-M}(2|g|) e^{i (N-M) arg g}.  A phase-swept variant
    is obtained by advancing arg g, see Coupling.swept.  Emits a
    TruncationWarning when the window cannot absorb the full Bessel spread.
    """
    d = window.dimension
    idx = window.indices
    offs = idx[:, None] - idx[None, :]
    x = 2.0 * g.magnitude
    jrow = _bessel_row(d, x)
    spill = jrow[d // 2 + 1 :] if d // 2 + 1 <= d else jrow[:0]
    if spill.size and np.max(np.abs(spill)) >= 1e-14:
        warnings.warn(
            f"window [{window.n_min}, {window.n_max}] is narrow for |g| = {g.magnitude}: "
            "sideband amplitudes do not decay below 1e-14 within half the window",
            TruncationWarning,
            stacklevel=2,
        )
    vals = jrow[np.abs(offs)]
    neg_odd = (offs < 0) & (np.abs(offs) % 2 == 1)
    vals = np.where(neg_odd, -vals, vals)
    entries = vals * np.exp(1j * g.phase * offs)
    return ComplexMatrix(window, entries)


def pinem_state(g: Coupling, window: EnergyWindow) -> np.ndarray:
    """Amplitudes of a single laser excitation of the zero-loss state.

    Component N is J_N(2|g|) e^{i N arg g}; this is the M = 0 column of the
    interaction unitary.
    """
    idx = window.indices
    amps = bessel_offsets(idx, 2.0 * g.magnitude).astype(np.complex128)
    amps *= np.exp(1j * g.phase * idx)
    return amps


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 in [0, 1]."""
    if rho.window != sigma.window:
        raise DimensionMismatchError(
            f"windows differ: [{rho.window.n_min}, {rho.window.n_max}] vs "
            f"[{sigma.window.n_min}, {sigma.window.n_max}]"
        )
    a = (rho.array + rho.array.conj().T) / 2.0
    w, v = np.linalg.eigh(a)
    w = np.clip(w, 0.0, None)
    sq = (v * np.sqrt(w)) @ v.conj().T
    inner = sq @ sigma.array @ sq
    lam = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    f = float(np.sum(np.sqrt(np.clip(lam, 0.0, None))) ** 2)
    return min(max(f, 0.0), 1.0)


def project_physical(m: ComplexMatrix) -> DensityMatrix:
    """Nearest physical state: Hermitize, clip negative eigenvalues, renormalise."""
    herm = (m.entries + m.entries.conj().T) / 2.0
    w, v = np.linalg.eigh(herm)
    w = np.clip(w, 0.0, None)
    total = float(np.sum(w))
    if total <= 0.0:
        raise DegenerateInputError("matrix has no positive spectral weight")
    rho = (v * (w / total)) @ v.conj().T
    rho = (rho + rho.conj().T) / 2.0
    return DensityMatrix(ComplexMatrix(m.window, rho), validate=False)
