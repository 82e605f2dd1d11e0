"""Command-line interface tying the toolkit together.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
failure (no usable result).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as fio
from .bayes import (
    DEFAULT_BETA,
    DEFAULT_THINNING,
    PosteriorModel,
    find_map,
    run_chains,
)
from .diagnostics import (
    DEFAULT_BURN_IN,
    autocorrelation,
    density_samples,
    gelman_rubin,
    posterior_summary,
)
from .errors import (
    AmbiguousPeakError,
    CurvatureError,
    DegenerateInputError,
    DimensionMismatchError,
    FetomoError,
    FormatError,
    UndefinedStatisticError,
    UndefinedWidthError,
)
from .forward_model import ForwardParams, fit_forward_model, model_density
from .ladder import Coupling, DensityMatrix, EnergyWindow, pinem_state
from .mle import MleConfig, mle_reconstruct
from .phase_space import (
    DEFAULT_GRID_POINTS,
    PositionGrid,
    coherence_moments,
    fwhm,
    temporal_density,
    wigner,
)
from .spectrogram import DEFAULT_PHASE_COUNT, PhaseGrid, sample_counts, simulate_spectrogram

USAGE_ERROR = 1
DATA_ERROR = 2
NUMERICAL_ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _parse_window(text: str) -> EnergyWindow:
    try:
        lo, hi = (int(part) for part in text.split(","))
        return EnergyWindow(lo, hi)
    except ValueError as exc:
        raise FormatError(f"bad window {text!r}: {exc}") from exc


def _parse_complex(text: str) -> complex:
    try:
        re, im = (float(part) for part in text.split(","))
        return complex(re, im)
    except ValueError as exc:
        raise FormatError(f"bad complex number {text!r}: {exc}") from exc


def _parse_seeds(text: str, n_chains: int) -> list[int]:
    if text is None:
        return list(range(n_chains))
    try:
        seeds = [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise FormatError(f"bad seed list {text!r}") from exc
    return seeds


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fetomo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a phase-swept spectrogram")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--state", help="density-matrix JSON file")
    src.add_argument("--pinem-g", help="complex excitation strength 're,im'")
    src.add_argument("--forward-params", help="decoherence-model parameter JSON file")
    p.add_argument("--g-abs", type=float, required=True, help="sweep coupling magnitude")
    p.add_argument("--phases", type=int, default=DEFAULT_PHASE_COUNT)
    p.add_argument("--window", help="'n_min,n_max' detection window")
    p.add_argument("--counts-per-phase", type=int, help="sample shot noise at this depth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("reconstruct-mle", help="fixed-point maximum-likelihood reconstruction")
    p.add_argument("--spectrogram", required=True)
    p.add_argument("--max-iter", type=int, default=MleConfig.max_iterations)
    p.add_argument("--tol", type=float, default=MleConfig.log_likelihood_tolerance)
    p.add_argument("--dilution", type=float, default=MleConfig.dilution)
    p.add_argument("--out", required=True)

    p = sub.add_parser("reconstruct-bayes", help="Bayesian reconstruction")
    bayes_sub = p.add_subparsers(dest="bayes_command", required=True)

    pm = bayes_sub.add_parser("map", help="maximum a posteriori point and curvature")
    pm.add_argument("--spectrogram", required=True)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--out-map", required=True)

    ps = bayes_sub.add_parser("sample", help="run Metropolis-Hastings chains")
    ps.add_argument("--map", required=True, dest="map_file")
    ps.add_argument("--beta", type=float, default=DEFAULT_BETA)
    ps.add_argument("--chains", type=int, default=4)
    ps.add_argument("--samples", type=int, required=True, help="proposals per chain")
    ps.add_argument("--thinning", type=int, default=DEFAULT_THINNING)
    ps.add_argument("--seeds", help="comma-separated, one per chain")
    ps.add_argument("--out-dir", required=True)

    pz = bayes_sub.add_parser("summarize", help="posterior mean and spread from stored chains")
    pz.add_argument("--chains", required=True, dest="chain_dir")
    pz.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    pz.add_argument("--out", required=True, help="mean density JSON")
    pz.add_argument("--summary-out", help="optional JSON with entrywise std and traces")

    p = sub.add_parser("diagnose", help="chain convergence diagnostics")
    p.add_argument("--chains", required=True, dest="chain_dir")
    p.add_argument(
        "--functional",
        default="zero-loss",
        help="'zero-loss' or 'entry:N,M:re' / 'entry:N,M:im'",
    )
    p.add_argument(
        "--diagnostic",
        choices=["gelman-rubin", "autocorrelation"],
        default="gelman-rubin",
    )
    p.add_argument("--max-lag", type=int, default=100)
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    p.add_argument("--out")

    p = sub.add_parser("analyze", help="phase-space analysis of a density matrix")
    p.add_argument("--state", required=True)
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--wigner", action="store_true")
    kind.add_argument("--temporal", action="store_true")
    kind.add_argument("--fwhm", action="store_true")
    kind.add_argument("--coherence", action="store_true")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID_POINTS)
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--out")

    p = sub.add_parser("fit-forward", help="fit the decoherence model to a state")
    p.add_argument("--target", required=True)
    p.add_argument("--init", required=True, help="parameter JSON file")
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    return parser


def _cmd_simulate(args) -> int:
    window = _parse_window(args.window) if args.window else None
    if args.state:
        rho = fio.read_density(args.state)
        window = window or rho.window
        if window != rho.window:
            rho = rho.embedded(window)
    elif args.pinem_g:
        if window is None:
            raise FormatError("--pinem-g requires --window")
        g = Coupling.from_complex(_parse_complex(args.pinem_g))
        rho = DensityMatrix.pure(window, pinem_state(g, window))
    else:
        if window is None:
            raise FormatError("--forward-params requires --window")
        params = fio.read_forward_params(args.forward_params)
        rho = model_density(params, window)
    s = simulate_spectrogram(rho, args.g_abs, PhaseGrid.uniform(args.phases), window)
    if args.counts_per_phase is not None:
        s = sample_counts(s, args.counts_per_phase, args.seed)
    fio.write_spectrogram(s, args.out)
    return 0


def _cmd_reconstruct_mle(args) -> int:
    s = fio.read_spectrogram(args.spectrogram)
    config = MleConfig(
        max_iterations=args.max_iter,
        log_likelihood_tolerance=args.tol,
        dilution=args.dilution,
    )
    result = mle_reconstruct(s, config)
    fio.write_density(result.density, args.out)
    status = "converged" if result.converged else "NOT converged"
    print(
        f"{status} after {result.iterations} iterations, "
        f"log-likelihood {result.log_likelihood_trace[-1]:.6f}"
    )
    return 0


def _cmd_bayes_map(args) -> int:
    s = fio.read_spectrogram(args.spectrogram)
    model = PosteriorModel(s)
    result = find_map(model, seed=args.seed)
    fio.write_map(result, s, model.state_window, args.out_map)
    print(
        f"MAP log-posterior {result.log_posterior_at_map:.6f} "
        f"(gradient inf-norm {result.gradient_inf_norm:.2e}, "
        f"{result.iterations} steps)"
    )
    return 0


def _cmd_bayes_sample(args) -> int:
    map_result, data, window = fio.read_map(args.map_file)
    model = PosteriorModel(data, state_window=window)
    seeds = _parse_seeds(args.seeds, args.chains)
    records = run_chains(
        model,
        map_result,
        beta=args.beta,
        n_chains=args.chains,
        n_samples=args.samples,
        thinning=args.thinning,
        seeds=seeds,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for record in records:
        fio.write_chain(record, out_dir / f"chain_{record.seed}.json")
        print(f"chain seed {record.seed}: acceptance {record.acceptance_rate:.3f}")
    return 0


def _cmd_bayes_summarize(args) -> int:
    chains = fio.read_chain_directory(args.chain_dir)
    summary = posterior_summary(chains, burn_in=args.burn_in)
    fio.write_density(summary.mean_density, args.out)
    if args.summary_out:
        doc = {
            "format": fio.FORMAT_TAG,
            "std_re": summary.std_real.tolist(),
            "std_im": summary.std_imag.tolist(),
            "zero_loss_mean": float(np.mean(summary.scalar_traces["zero_loss"])),
        }
        with open(args.summary_out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.write("\n")
    return 0


def _functional_series(chains, name: str, burn_in: int):
    window = chains[0].window
    series = []
    for record in chains:
        retained = record.retained(burn_in)
        if retained.shape[0] == 0:
            raise FormatError(
                f"burn-in {burn_in} discards every stored sample of chain {record.seed}"
            )
        stack = density_samples(retained, window)
        if name == "zero-loss":
            i = window.index_of(0)
            series.append(stack[:, i, i].real)
        elif name.startswith("entry:"):
            try:
                _, pair, part = name.split(":")
                n, m = (int(v) for v in pair.split(","))
            except ValueError as exc:
                raise FormatError(f"bad functional {name!r}") from exc
            i, j = window.index_of(n), window.index_of(m)
            vals = stack[:, i, j]
            series.append(vals.real if part == "re" else vals.imag)
        else:
            raise FormatError(f"unknown functional {name!r}")
    return series


def _cmd_diagnose(args) -> int:
    chains = fio.read_chain_directory(args.chain_dir)
    series = _functional_series(chains, args.functional, args.burn_in)
    if args.diagnostic == "gelman-rubin":
        doc = {"functional": args.functional, "gelman_rubin": gelman_rubin(series)}
    else:
        pooled = np.concatenate(series)
        acf = autocorrelation(pooled, args.max_lag)
        doc = {
            "functional": args.functional,
            "lags": list(range(args.max_lag + 1)),
            "autocorrelation": acf.tolist(),
        }
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_analyze(args) -> int:
    rho = fio.read_density(args.state)
    grid = PositionGrid(args.grid)
    if args.wigner:
        if not args.out:
            raise FormatError("--wigner needs --out for the CSV table")
        fio.export_wigner_csv(wigner(rho, grid), args.out)
    elif args.temporal:
        if not args.out:
            raise FormatError("--temporal needs --out for the CSV table")
        fio.export_temporal_csv(grid, temporal_density(rho, grid), args.out)
    elif args.fwhm:
        value = fwhm(temporal_density(rho, grid))
        doc = json.dumps({"fwhm": value})
        print(doc)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(doc + "\n")
    else:
        moments = coherence_moments(rho, args.n_max)
        doc = json.dumps(
            {"moments": [[float(m.real), float(m.imag)] for m in moments]}
        )
        print(doc)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(doc + "\n")
    return 0


def _cmd_fit_forward(args) -> int:
    target = fio.read_density(args.target)
    init = fio.read_forward_params(args.init)
    result = fit_forward_model(target, init, restarts=args.restarts, seed=args.seed)
    doc = {
        "format": fio.FORMAT_TAG,
        "g_lo": result.params.g_lo,
        "g_hi": result.params.g_hi,
        "chirp": result.params.chirp,
        "phase_noise": result.params.phase_noise,
        "frobenius_distance": result.frobenius_distance,
        "fidelity": result.fidelity,
        "converged": result.converged,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(json.dumps(doc, sort_keys=True))
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "reconstruct-mle": _cmd_reconstruct_mle,
    "diagnose": _cmd_diagnose,
    "analyze": _cmd_analyze,
    "fit-forward": _cmd_fit_forward,
}

_BAYES_COMMANDS = {
    "map": _cmd_bayes_map,
    "sample": _cmd_bayes_sample,
    "summarize": _cmd_bayes_summarize,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "reconstruct-bayes":
            return _BAYES_COMMANDS[args.bayes_command](args)
        return _COMMANDS[args.command](args)
    except (FormatError, DimensionMismatchError, DegenerateInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (
        CurvatureError,
        UndefinedWidthError,
        AmbiguousPeakError,
        UndefinedStatisticError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except FetomoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR


def entry_point() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
