"""Discrete-time survival models with weighted integration of published priors.

The package fits discrete relative risk models on person-period data,
blends a previously published prediction model into the fit through a
pseudo-response weighted objective with a cross-validated weight, and
ships a replication study comparing the weighted fit against its
prior-only and local-only endpoints.
"""

from ._version import __version__
from .data import (
    CovariateSchema,
    PersonPeriodTable,
    SubjectRecord,
    SurvivalDataset,
    expand_person_period,
)
from .errors import (
    AlignmentError,
    DataFileError,
    DegenerateFoldError,
    DimensionError,
    DomainError,
    KlsurvError,
    NoEventsError,
    SingularHessianError,
    TauMismatchError,
    UnestimablePeriodError,
    UnknownCovariateError,
)
from .fitting import (
    FitOptions,
    FittedModel,
    evaluate,
    fit_kl,
    fit_kl_table,
    fit_local,
    predict_hazard,
    predict_survival,
)
from .likelihood import (
    ParamVector,
    gradient,
    hessian,
    log_likelihood,
    pseudo_responses,
    weighted_log_likelihood,
)
from .links import CLOGLOG, LOG, LOGIT, Link, get_link, link_inverse, link_inverse_derivative
from .prior import PriorModel, align_prior, prior_predictions
from .simulate import (
    ReplicationRecord,
    ScenarioConfig,
    StudyResult,
    ar1_covariance,
    gen_censoring,
    gen_covariates,
    gen_event_times,
    generative_prior,
    make_dataset,
    make_setting,
    run_study,
)
from .tuning import CvConfig, CvResult, assign_folds, cv_select_lambda, default_lambda_grid

__all__ = [
    "__version__",
    "AlignmentError",
    "CLOGLOG",
    "CovariateSchema",
    "CvConfig",
    "CvResult",
    "DataFileError",
    "DegenerateFoldError",
    "DimensionError",
    "DomainError",
    "FitOptions",
    "FittedModel",
    "KlsurvError",
    "LOG",
    "LOGIT",
    "Link",
    "NoEventsError",
    "ParamVector",
    "PersonPeriodTable",
    "PriorModel",
    "ReplicationRecord",
    "ScenarioConfig",
    "SingularHessianError",
    "StudyResult",
    "SubjectRecord",
    "SurvivalDataset",
    "TauMismatchError",
    "UnestimablePeriodError",
    "UnknownCovariateError",
    "align_prior",
    "ar1_covariance",
    "assign_folds",
    "cv_select_lambda",
    "default_lambda_grid",
    "evaluate",
    "expand_person_period",
    "fit_kl",
    "fit_kl_table",
    "fit_local",
    "gen_censoring",
    "gen_covariates",
    "gen_event_times",
    "generative_prior",
    "get_link",
    "gradient",
    "hessian",
    "link_inverse",
    "link_inverse_derivative",
    "log_likelihood",
    "make_dataset",
    "make_setting",
    "predict_hazard",
    "predict_survival",
    "prior_predictions",
    "pseudo_responses",
    "run_study",
    "weighted_log_likelihood",
]
