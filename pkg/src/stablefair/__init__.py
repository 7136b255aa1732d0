"""Stability-regularized fair classification in an RKHS.

Train kernel classifiers under a covariance fairness constraint, measure
their uniform and prediction stability, and compare against closed-form
stability and generalization bounds.
"""

from .core import (
    Dataset,
    KernelClassifier,
    LinearClassifier,
    Repetition,
    Sample,
    accuracy,
    derive_seed,
    distance,
    norm_sq,
    predict,
    predict_all,
    repeated_splits,
    score,
    split,
    swap_sample,
)
from .fairness import (
    CovarianceConstraint,
    FairnessKind,
    FairnessSpec,
    covariance_constraint,
    fairness_penalty,
    gamma,
    statistical_rate,
)
from .kernels import KernelKind, KernelSpec, gram, kappa_sq, rkhs_distance, rkhs_norm_sq
from .losses import LossKind, LossSpec, admissibility_constant, loss, loss_grad
from .solver import (
    ConstraintMethod,
    Mode,
    SolverError,
    TrainConfig,
    TrainResult,
    empirical_risk,
    norm_path,
    objective,
    train,
)
from .stability import (
    BoundInputs,
    Protocol,
    StabilityReport,
    bregman,
    empirical_uniform_stability,
    estimate_G,
    excess_risk_bound,
    generalization_bound_highprob,
    generalization_gap,
    norm_gap_bound,
    optimal_lambda,
    prediction_agreement_check,
    run_stability_suite,
    stab_metric,
    stability_bound_linear,
    stability_bound_rkhs,
)
from .synthetic import AdultSurrogate, TwoGroupGaussians

__version__ = "0.1.0"
