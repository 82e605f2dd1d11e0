"""On-disk formats: spectrograms, density matrices, chains, and CSV export.

Everything metadata-like is JSON with a "format" version key; the one bulk
artifact (chain samples) is a sidecar binary of little-endian float64 so
that interrupted runs stay truncatable to whole records.  Writers emit
canonical JSON (sorted keys) so golden files are byte-stable.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from .bayes import ChainRecord, MapResult
from .errors import FormatError
from .forward_model import ForwardParams
from .ladder import ComplexMatrix, DensityMatrix, EnergyWindow
from .phase_space import PositionGrid, WignerTable
from .spectrogram import PhaseGrid, Spectrogram

FORMAT_TAG = "fetomo/1"


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return doc


def _dump_json(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _require(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise FormatError(f"{path}: missing key {key!r}")
    return doc[key]


def _check_format(doc: dict, path) -> None:
    tag = _require(doc, "format", path)
    if tag != FORMAT_TAG:
        raise FormatError(f"{path}: unsupported format {tag!r}, expected {FORMAT_TAG!r}")


def _finite_array(doc: dict, key: str, path) -> np.ndarray:
    arr = np.asarray(_require(doc, key, path), dtype=float)
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{path}: key {key!r} contains non-finite numbers")
    return arr


def _window(doc: dict, path) -> EnergyWindow:
    n_min = _require(doc, "n_min", path)
    n_max = _require(doc, "n_max", path)
    try:
        return EnergyWindow(int(n_min), int(n_max))
    except ValueError as exc:
        raise FormatError(f"{path}: bad window ({exc})") from exc


# ---------------------------------------------------------------- spectrogram

def write_spectrogram(s: Spectrogram, path) -> None:
    doc = {
        "format": FORMAT_TAG,
        "g_abs": float(s.coupling_magnitude),
        "phases": s.phases.values.tolist(),
        "n_min": s.window.n_min,
        "n_max": s.window.n_max,
        "counts": s.counts.tolist(),
    }
    if s.total_per_phase is not None:
        doc["total_per_phase"] = float(s.total_per_phase)
    _dump_json(doc, path)


def read_spectrogram(path) -> Spectrogram:
    doc = _load_json(path)
    _check_format(doc, path)
    window = _window(doc, path)
    g_abs = float(_require(doc, "g_abs", path))
    phases_arr = _finite_array(doc, "phases", path)
    counts = _finite_array(doc, "counts", path)
    if counts.ndim != 2 or counts.shape != (phases_arr.size, window.dimension):
        raise FormatError(
            f"{path}: key 'counts' has shape {counts.shape}, expected "
            f"{(phases_arr.size, window.dimension)}"
        )
    if np.any(counts < 0):
        raise FormatError(f"{path}: key 'counts' contains negative entries")
    total = doc.get("total_per_phase")
    try:
        return Spectrogram(
            window=window,
            phases=PhaseGrid(phases_arr),
            counts=counts,
            coupling_magnitude=g_abs,
            total_per_phase=None if total is None else float(total),
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# -------------------------------------------------------------------- density

def write_density(rho: DensityMatrix, path) -> None:
    doc = {
        "format": FORMAT_TAG,
        "n_min": rho.window.n_min,
        "n_max": rho.window.n_max,
        # adding 0.0 folds negative zeros so rewrites stay byte-identical
        "re": (rho.array.real + 0.0).tolist(),
        "im": (rho.array.imag + 0.0).tolist(),
    }
    _dump_json(doc, path)


def read_density(path) -> DensityMatrix:
    doc = _load_json(path)
    _check_format(doc, path)
    window = _window(doc, path)
    re = _finite_array(doc, "re", path)
    im = _finite_array(doc, "im", path)
    d = window.dimension
    for key, arr in (("re", re), ("im", im)):
        if arr.shape != (d, d):
            raise FormatError(f"{path}: key {key!r} has shape {arr.shape}, expected {(d, d)}")
    if np.max(np.abs(re - re.T)) > 1e-9:
        raise FormatError(f"{path}: key 're' is not symmetric within 1e-9")
    if np.max(np.abs(im + im.T)) > 1e-9:
        raise FormatError(f"{path}: key 'im' is not antisymmetric within 1e-9")
    if abs(np.trace(re) - 1.0) > 1e-8:
        raise FormatError(f"{path}: key 're' has trace {np.trace(re)!r}, expected 1")
    arr = re + 1j * im
    arr = (arr + arr.conj().T) / 2.0
    return DensityMatrix(ComplexMatrix(window, arr), validate=False)


# --------------------------------------------------------------------- chains

def _payload_path(header_path) -> Path:
    return Path(header_path).with_suffix(".bin")


def write_chain(record: ChainRecord, path) -> None:
    """Header JSON at ``path`` plus raw little-endian float64 sidecar ``.bin``."""
    if record.window is None:
        raise ValueError("chain record carries no energy window")
    n_samples, n_params = record.samples.shape
    d = record.window.dimension
    if n_params != 2 * d * d:
        raise ValueError("sample width does not match the window dimension")
    payload = _payload_path(path)
    doc = {
        "format": FORMAT_TAG,
        "d": d,
        "n_min": record.window.n_min,
        "n_max": record.window.n_max,
        "beta": float(record.beta),
        "seed": int(record.seed),
        "thinning": int(record.thinning),
        "acceptance_count": int(record.acceptance_count),
        "proposal_count": int(record.proposal_count),
        "n_samples": int(n_samples),
        "payload": payload.name,
    }
    _dump_json(doc, path)
    with open(payload, "wb") as fh:
        fh.write(np.ascontiguousarray(record.samples, dtype="<f8").tobytes())


def read_chain(path) -> ChainRecord:
    doc = _load_json(path)
    _check_format(doc, path)
    window = _window(doc, path)
    d = int(_require(doc, "d", path))
    if d != window.dimension:
        raise FormatError(f"{path}: key 'd' = {d} disagrees with the window dimension")
    n_samples = int(_require(doc, "n_samples", path))
    n_params = 2 * d * d
    payload = Path(path).parent / str(_require(doc, "payload", path))
    expected = 8 * n_samples * n_params
    actual = os.path.getsize(payload)
    if actual != expected:
        raise FormatError(
            f"{payload}: payload is {actual} bytes, expected exactly {expected} "
            f"({n_samples} samples x {n_params} parameters x 8 bytes)"
        )
    raw = np.fromfile(payload, dtype="<f8").reshape(n_samples, n_params)
    if not np.all(np.isfinite(raw)):
        raise FormatError(f"{payload}: payload contains non-finite numbers")
    try:
        return ChainRecord(
            samples=raw,
            acceptance_count=int(_require(doc, "acceptance_count", path)),
            proposal_count=int(_require(doc, "proposal_count", path)),
            seed=int(_require(doc, "seed", path)),
            beta=float(_require(doc, "beta", path)),
            thinning=int(_require(doc, "thinning", path)),
            window=window,
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def read_chain_directory(directory) -> list[ChainRecord]:
    paths = sorted(Path(directory).glob("chain_*.json"))
    if not paths:
        raise FormatError(f"{directory}: no chain_*.json files found")
    return [read_chain(p) for p in paths]


# ------------------------------------------------------------- forward params

def write_forward_params(params: ForwardParams, path) -> None:
    doc = {
        "format": FORMAT_TAG,
        "g_lo": float(params.g_lo),
        "g_hi": float(params.g_hi),
        "chirp": float(params.chirp),
        "phase_noise": float(params.phase_noise),
    }
    _dump_json(doc, path)


def read_forward_params(path) -> ForwardParams:
    doc = _load_json(path)
    for key in ("g_lo", "g_hi"):
        _require(doc, key, path)
    try:
        return ForwardParams(
            g_lo=float(doc["g_lo"]),
            g_hi=float(doc["g_hi"]),
            chirp=float(doc.get("chirp", 0.0)),
            phase_noise=float(doc.get("phase_noise", 0.0)),
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# ------------------------------------------------------------------ MAP files

def write_map(map_result: MapResult, data: Spectrogram, window: EnergyWindow, path) -> None:
    """Self-contained MAP document: embeds the spectrogram it was fit to."""
    doc = {
        "format": FORMAT_TAG,
        "n_min": window.n_min,
        "n_max": window.n_max,
        "x_map": map_result.x_map.tolist(),
        "hessian": map_result.hessian.tolist(),
        "log_posterior": float(map_result.log_posterior_at_map),
        "converged": bool(map_result.converged),
        "spectrogram": {
            "g_abs": float(data.coupling_magnitude),
            "phases": data.phases.values.tolist(),
            "n_min": data.window.n_min,
            "n_max": data.window.n_max,
            "counts": data.counts.tolist(),
            **(
                {"total_per_phase": float(data.total_per_phase)}
                if data.total_per_phase is not None
                else {}
            ),
        },
    }
    _dump_json(doc, path)


def read_map(path) -> tuple[MapResult, Spectrogram, EnergyWindow]:
    doc = _load_json(path)
    _check_format(doc, path)
    window = _window(doc, path)
    x_map = _finite_array(doc, "x_map", path)
    hessian = _finite_array(doc, "hessian", path)
    n = x_map.size
    if hessian.shape != (n, n):
        raise FormatError(f"{path}: key 'hessian' has shape {hessian.shape}, expected {(n, n)}")
    if n != 2 * window.dimension**2:
        raise FormatError(f"{path}: key 'x_map' length {n} does not match the window")
    sub = _require(doc, "spectrogram", path)
    if not isinstance(sub, dict):
        raise FormatError(f"{path}: key 'spectrogram' must be an object")
    sub = {"format": FORMAT_TAG, **sub}
    spec_window = _window(sub, path)
    counts = _finite_array(sub, "counts", path)
    if np.any(counts < 0):
        raise FormatError(f"{path}: spectrogram counts contain negative entries")
    total = sub.get("total_per_phase")
    data = Spectrogram(
        window=spec_window,
        phases=PhaseGrid(_finite_array(sub, "phases", path)),
        counts=counts,
        coupling_magnitude=float(_require(sub, "g_abs", path)),
        total_per_phase=None if total is None else float(total),
    )
    result = MapResult(
        x_map=x_map,
        hessian=hessian,
        log_posterior_at_map=float(_require(doc, "log_posterior", path)),
        converged=bool(doc.get("converged", True)),
        gradient_inf_norm=math.nan,
        iterations=0,
    )
    return result, data, window


# ----------------------------------------------------------------- CSV export

def export_temporal_csv(grid: PositionGrid, density: np.ndarray, path) -> None:
    """Rows of ``x,value`` for external plotting."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,value\n")
        for x, v in zip(grid.values, density):
            fh.write(f"{float(x)!r},{float(v)!r}\n")


def export_wigner_csv(table: WignerTable, path) -> None:
    """Rows of ``x,p,value`` for external plotting."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,p,value\n")
        for i, x in enumerate(table.grid.values):
            for j, p in enumerate(table.momenta.indices):
                fh.write(f"{float(x)!r},{int(p)},{float(table.values[i, j])!r}\n")
