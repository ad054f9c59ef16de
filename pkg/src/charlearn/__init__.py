"""Probabilistic learning constrained by target realizations.

Given a small training set of joint realizations (quantity of interest +
control parameters) and a target set of realizations of the QoI alone, this
package computes the probability measure closest to the training-set prior in
Kullback-Leibler divergence subject to kernel characteristic-function
constraints built from the targets, and draws samples from it with a
dissipative-Hamiltonian MCMC generator.

Pipeline: ``reduction`` (scaling + PCA), ``prior`` (Gaussian-KDE density of
the reduced coordinates), ``constraints`` (kernel feature map and target
moments), ``sampler`` (Stormer-Verlet chains with counter-based noise),
``solver`` (damped Newton on the Lagrange multiplier), ``posterior``
(reconstruction and reporting statistics), ``datagen`` (synthetic validation
problems).
"""

from charlearn.reduction import (
    RawDataset,
    ScalingParams,
    ReducedBasis,
    ReducedTrainingSet,
    ProjectedTargets,
    scale_dataset,
    fit_reduction,
    pca_error,
    project_targets,
    reconstruct,
)
from charlearn.prior import PriorKde, fit_prior, log_zeta, score, prior_moments_closed_form
from charlearn.constraints import (
    ConstraintSpec,
    bandwidth_s,
    build_constraint_spec,
    eval_hc,
    grad_hc,
    compute_bc,
    constraint_mismatch,
)
from charlearn.noise import NoiseBank, derive_seed
from charlearn.sampler import (
    SamplerConfig,
    ChainState,
    ChainDivergenceError,
    init_chains,
    drift,
    stormer_verlet_step,
    run_chains,
)
from charlearn.solver import (
    SolverConfig,
    SolverTrace,
    SolverAbort,
    estimate_gradient,
    estimate_hessian,
    newton_step,
    err,
    solve_lambda,
)
from charlearn.posterior import PosteriorEnsemble, build_posterior, mean_square_norm, marginal_pdf
from charlearn.datagen import (
    GaussianCaseConfig,
    SyntheticSupervisedConfig,
    gen_gaussian_case,
    sweep_j,
    gen_supervised,
)

__version__ = "0.1.0"

__all__ = [
    "RawDataset",
    "ScalingParams",
    "ReducedBasis",
    "ReducedTrainingSet",
    "ProjectedTargets",
    "scale_dataset",
    "fit_reduction",
    "pca_error",
    "project_targets",
    "reconstruct",
    "PriorKde",
    "fit_prior",
    "log_zeta",
    "score",
    "prior_moments_closed_form",
    "ConstraintSpec",
    "bandwidth_s",
    "build_constraint_spec",
    "eval_hc",
    "grad_hc",
    "compute_bc",
    "constraint_mismatch",
    "NoiseBank",
    "derive_seed",
    "SamplerConfig",
    "ChainState",
    "ChainDivergenceError",
    "init_chains",
    "drift",
    "stormer_verlet_step",
    "run_chains",
    "SolverConfig",
    "SolverTrace",
    "SolverAbort",
    "estimate_gradient",
    "estimate_hessian",
    "newton_step",
    "err",
    "solve_lambda",
    "PosteriorEnsemble",
    "build_posterior",
    "mean_square_norm",
    "marginal_pdf",
    "GaussianCaseConfig",
    "SyntheticSupervisedConfig",
    "gen_gaussian_case",
    "sweep_j",
    "gen_supervised",
]
