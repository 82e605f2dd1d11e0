"""Free-electron quantum state tomography toolkit.

Simulates phase-swept electron energy spectrograms from density matrices
on the photon-exchange ladder and inverts them back by maximum-likelihood
iteration or Bayesian Markov chain Monte Carlo, with discrete-periodic
phase-space analysis and a physical decoherence-model fitter on top.
"""

from .bayes import (
    ChainRecord,
    GaussianModel,
    MapResult,
    PosteriorModel,
    find_map,
    hessian_at_map,
    mh_step,
    param_to_density,
    param_to_matrix,
    pcn_propose,
    run_chains,
)
from .diagnostics import (
    PosteriorSummary,
    autocorrelation,
    gelman_rubin,
    gelman_rubin_map,
    posterior_summary,
)
from .errors import (
    AmbiguousPeakError,
    ConvergenceWarning,
    CurvatureError,
    DegenerateInputError,
    DimensionMismatchError,
    FetomoError,
    FormatError,
    TruncationWarning,
    UndefinedStatisticError,
    UndefinedWidthError,
)
from .forward_model import (
    FitResult,
    ForwardParams,
    fit_forward_model,
    model_density,
    pure_interaction_state,
)
from .ladder import (
    ComplexMatrix,
    Coupling,
    DensityMatrix,
    EnergyWindow,
    bessel_j,
    fidelity,
    interaction_unitary,
    pinem_state,
    project_physical,
)
from .mle import MleConfig, MleResult, mle_reconstruct, r_operator
from .phase_space import (
    PositionGrid,
    WignerTable,
    coherence_moments,
    fwhm,
    temporal_density,
    wigner,
)
from .spectrogram import (
    PhaseGrid,
    Spectrogram,
    log_likelihood,
    sample_counts,
    simulate_spectrogram,
)

__version__ = "0.1.0"
