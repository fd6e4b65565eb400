"""Sequential Monte Carlo sampler with approximately optimal L-kernels.

The backward kernel in the SMC weight update is a free choice; this
package implements the usual forward-proposal choice plus two
approximations of the variance-minimising one, built by fitting a
Gaussian (or Gaussian mixture) to the joint population of (previous,
current) particle positions and conditioning on the current position.
Per-iteration estimates are combined with ESS-maximising recycling
constants.
"""

from .backend import BACKEND
from .config import (
    ExperimentConfig,
    GaussianTarget,
    MixtureTarget,
    ProposalSpec,
)
from .distributions import (
    GaussianParams,
    GmmParams,
    JointBlocks,
    fit_gaussian,
    fit_gmm,
    gaussian_conditional,
    gaussian_log_pdf,
    gaussian_sample,
    gmm_conditional,
    gmm_log_pdf,
    gmm_sample,
)
from .errors import (
    DegenerateWeightsError,
    GmmFitError,
    InsufficientSamplesError,
    SingularCovarianceError,
    SmcRunError,
)
from .experiments import (
    StudyReport,
    builtin_config,
    emit_csv,
    run_study,
)
from .lkernels import FittedLKernel, LKernelStrategy, fit_lkernel, log_lkernel
from .recycling import (
    RecyclingState,
    recycled_estimate,
    recycling_objective,
    update_recycling,
)
from .smc import (
    ParticleSystem,
    RunRecord,
    ess,
    estimate_moments,
    init,
    propose_and_reweight,
    resample,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DegenerateWeightsError",
    "ExperimentConfig",
    "FittedLKernel",
    "GaussianParams",
    "GaussianTarget",
    "GmmFitError",
    "GmmParams",
    "InsufficientSamplesError",
    "JointBlocks",
    "LKernelStrategy",
    "MixtureTarget",
    "ParticleSystem",
    "ProposalSpec",
    "RecyclingState",
    "RunRecord",
    "SingularCovarianceError",
    "SmcRunError",
    "StudyReport",
    "builtin_config",
    "emit_csv",
    "ess",
    "estimate_moments",
    "fit_gaussian",
    "fit_gmm",
    "fit_lkernel",
    "gaussian_conditional",
    "gaussian_log_pdf",
    "gaussian_sample",
    "gmm_conditional",
    "gmm_log_pdf",
    "gmm_sample",
    "init",
    "log_lkernel",
    "propose_and_reweight",
    "recycled_estimate",
    "recycling_objective",
    "resample",
    "run",
    "run_study",
    "update_recycling",
]
