"""Newton maximization of the (weighted) objective, prediction, validation.

The optimizer is a dense Newton ascent on the joint ``(eta, beta)`` with
step halving whenever a proposed step would not improve the objective.
The objective is concave for the logit link; for the log and cloglog
links the Hessian can be indefinite, so a non-ascent or unsolvable Newton
direction falls back to a minimum-norm least-squares step and finally to
the raw gradient.  Baselines are kept inside ``[-ETA_BOUND, ETA_BOUND]``
(a period with zero observed deaths would otherwise push its baseline to
minus infinity); periods with no at-risk rows are never updated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CovariateSchema, PersonPeriodTable, SurvivalDataset, expand_person_period
from .errors import (
    DimensionError,
    DomainError,
    NoEventsError,
    SingularHessianError,
    TauMismatchError,
    UnestimablePeriodError,
)
from .likelihood import ParamVector, _evaluate, log_likelihood, pseudo_responses
from .links import Link
from .prior import PriorModel, align_prior, prior_predictions

# |eta_k| clamp inside the optimizer; hazards at the bound are ~3e-7 under
# every link, numerically indistinguishable from the unbounded optimum.
ETA_BOUND = 15.0
# converged means the projected gradient max-norm is below this
GRAD_TOL = 1e-5
# the Newton loop aims for this gradient norm before stopping
GRAD_STOP = 1e-7
# log-link domain maintenance: keep every linear predictor below -margin
LOG_LINK_MARGIN = 1e-8
# raw death fractions are clamped here before the link maps them to a start
INIT_FRAC_EPS = 1e-4


@dataclass(frozen=True)
class FitOptions:
    """Optimizer controls.  ``init=None`` selects the default start."""

    max_iter: int = 100
    tol: float = 1e-9
    step_halving_max: int = 30
    init: ParamVector | None = None

    def __post_init__(self) -> None:
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.step_halving_max < 0:
            raise ValueError("step_halving_max must be >= 0")


@dataclass(frozen=True, eq=False)
class FittedModel:
    """Result of a fit: parameters plus link, schema and diagnostics.

    ``estimable[k]`` is False when period ``k+1`` had no at-risk rows and
    no prior baseline was available to fill it; predictions touching such
    a period raise.  ``lambda_used`` is 0 for local-only fits.
    """

    params: ParamVector
    link: Link
    schema: CovariateSchema
    tau: int
    converged: bool
    n_iter: int
    final_objective: float
    lambda_used: float
    estimable: np.ndarray


def _maximize(
    table: PersonPeriodTable,
    link: Link,
    resp: np.ndarray,
    opts: FitOptions,
    eta_fill: np.ndarray | None = None,
):
    """Safeguarded Newton ascent; returns (params, estimable, converged, n_iter, objective)."""
    tau = table.tau
    p = table.covariates.shape[1]
    n_rows = table.n_rows
    if p >= n_rows:
        raise DimensionError(f"{p} covariates but only {n_rows} person-period rows")
    period0 = table.period - 1
    risk = table.period_counts
    estimable = risk > 0
    if p:
        dead_cols = ~np.any(table.covariates != 0.0, axis=0)
        if dead_cols.any():
            j = int(np.argmax(dead_cols))
            raise SingularHessianError(tau + j, f"covariate column {j} is identically zero")

    if opts.init is not None:
        if opts.init.n_periods != tau or opts.init.n_covariates != p:
            raise DimensionError("init parameters do not match the table dimensions")
        eta = np.clip(opts.init.eta, -ETA_BOUND, ETA_BOUND)
        beta = opts.init.beta.copy()
    else:
        # start from the raw per-period death fractions on the link scale
        frac = np.full(tau, 0.5)
        deaths = np.bincount(period0, weights=resp, minlength=tau)
        frac[estimable] = deaths[estimable] / risk[estimable]
        frac = np.clip(frac, INIT_FRAC_EPS, 1.0 - INIT_FRAC_EPS)
        eta = np.clip(np.asarray(link.forward(frac)), -ETA_BOUND, ETA_BOUND)
        beta = np.zeros(p)
    if eta_fill is not None:
        fill = np.asarray(eta_fill, dtype=float)[:tau]
        eta = np.where(estimable, eta, fill)
    else:
        eta = np.where(estimable, eta, 0.0)

    free = np.concatenate([estimable, np.ones(p, dtype=bool)])
    eta_ix = np.flatnonzero(free[:tau])
    n_eta_free = eta_ix.size
    theta = np.concatenate([eta, beta])

    def admissible(th: np.ndarray) -> bool:
        if link.kind != "log":
            return True
        psi = th[period0] + table.covariates @ th[tau:]
        return bool(psi.max(initial=-1.0) < -LOG_LINK_MARGIN)

    def projected(g_full: np.ndarray, th: np.ndarray) -> np.ndarray:
        # zero out components pressing against the eta bound
        proj = g_full[free].copy()
        eta_vals = th[eta_ix]
        ge = proj[:n_eta_free]
        ge[(eta_vals >= ETA_BOUND) & (ge > 0.0)] = 0.0
        ge[(eta_vals <= -ETA_BOUND) & (ge < 0.0)] = 0.0
        return proj

    if link.kind == "log" and not admissible(theta):
        raise DomainError("initial parameters violate the log-link domain")

    f, g_full, _ = _evaluate(theta[:tau], theta[tau:], table, link, resp, want_grad=True)
    n_iter = 0
    small_changes = 0
    while n_iter < opts.max_iter:
        if np.max(np.abs(projected(g_full, theta)), initial=0.0) < GRAD_STOP:
            break
        g_free = g_full[free]
        _, _, hess = _evaluate(
            theta[:tau], theta[tau:], table, link, resp, want_grad=True, want_hess=True
        )
        h_free = hess[np.ix_(free, free)]
        step = None
        try:
            cand = np.linalg.solve(h_free, -g_free)
            if np.isfinite(cand).all() and cand @ g_free > 0.0:
                step = cand
        except np.linalg.LinAlgError:
            pass
        if step is None:
            cand = np.linalg.lstsq(h_free, -g_free, rcond=None)[0]
            if np.isfinite(cand).all() and cand @ g_free > 0.0:
                step = cand
        if step is None:
            step = g_free

        accepted = False
        scale = 1.0
        for _ in range(opts.step_halving_max + 1):
            trial = theta.copy()
            trial[free] = trial[free] + scale * step
            trial[eta_ix] = np.clip(trial[eta_ix], -ETA_BOUND, ETA_BOUND)
            if admissible(trial):
                f_try, g_try, _ = _evaluate(
                    trial[:tau], trial[tau:], table, link, resp, want_grad=True
                )
                if np.isfinite(f_try) and f_try > f:
                    accepted = True
                    break
            scale *= 0.5
        if not accepted:
            break
        rel_change = abs(f_try - f) / (1.0 + abs(f))
        assert f_try >= f  # ascent invariant, guaranteed by the acceptance rule
        theta, f, g_full = trial, f_try, g_try
        n_iter += 1
        if rel_change < opts.tol:
            small_changes += 1
            if small_changes >= 2:
                break
        else:
            small_changes = 0

    converged = bool(np.max(np.abs(projected(g_full, theta)), initial=0.0) < GRAD_TOL)
    params = ParamVector(theta[:tau], theta[tau:])
    return params, estimable, converged, n_iter, f


def fit_local(data: SurvivalDataset, link: Link, opts: FitOptions | None = None) -> FittedModel:
    """Maximize the unweighted objective over ``(eta, beta)``.

    For the logit link the objective is concave, so the returned
    stationary point is the global maximum.  Non-convergence is reported
    through the ``converged`` flag, not an exception.
    """
    opts = opts or FitOptions()
    if data.n_events == 0:
        raise NoEventsError("dataset has no observed events")
    table = expand_person_period(data)
    params, estimable, converged, n_iter, obj = _maximize(table, link, table.death, opts)
    return FittedModel(params, link, data.schema, data.tau, converged, n_iter, obj, 0.0, estimable)


def fit_kl(
    data: SurvivalDataset,
    prior: PriorModel,
    lam: float,
    link: Link,
    opts: FitOptions | None = None,
) -> FittedModel:
    """Maximize the prior-weighted objective at weight ``lam``.

    ``lam = 0`` reproduces :func:`fit_local` exactly; large ``lam`` drives
    the fit toward the prior's predictions.
    """
    if data.n_events == 0:
        raise NoEventsError("dataset has no observed events")
    table = expand_person_period(data)
    preds = prior_predictions(prior, table, data.schema)
    return fit_kl_table(table, data.schema, preds, lam, link, opts, prior_eta=prior.eta_hat)


def fit_kl_table(
    table: PersonPeriodTable,
    schema: CovariateSchema,
    prior_preds: np.ndarray,
    lam: float,
    link: Link,
    opts: FitOptions | None = None,
    prior_eta: np.ndarray | None = None,
) -> FittedModel:
    """Weighted fit on a pre-expanded table with precomputed prior predictions.

    Exists so cross-validation can reuse one expansion and one prediction
    pass per fold across a whole lambda grid.  With ``lam > 0`` and
    ``prior_eta`` given, baselines for periods without at-risk rows are
    taken from the prior; at ``lam = 0`` they stay unestimable so the
    result matches a local-only fit.
    """
    opts = opts or FitOptions()
    if schema.p != table.covariates.shape[1]:
        raise DimensionError(
            f"schema has {schema.p} covariates, table rows carry {table.covariates.shape[1]}"
        )
    resp = pseudo_responses(table.death, prior_preds, lam)
    fill = prior_eta if lam > 0 else None
    params, estimable, converged, n_iter, obj = _maximize(table, link, resp, opts, eta_fill=fill)
    if fill is not None:
        estimable = np.ones(table.tau, dtype=bool)
    return FittedModel(params, link, schema, table.tau, converged, n_iter, obj, float(lam), estimable)


def predict_hazard(model: FittedModel, covariates) -> np.ndarray:
    """Per-period hazard curve ``g(eta_k + x' beta)`` for one covariate vector."""
    x = np.asarray(covariates, dtype=float)
    if x.ndim != 1 or x.shape[0] != model.schema.p:
        raise DimensionError(
            f"expected a covariate vector of length {model.schema.p}, got shape {x.shape}"
        )
    if not model.estimable.all():
        bad = (np.flatnonzero(~model.estimable) + 1).tolist()
        raise UnestimablePeriodError(f"baseline undefined for periods {bad}")
    psi = model.params.eta + float(x @ model.params.beta)
    return np.asarray(model.link.inverse(psi))


def predict_survival(model: FittedModel, covariates) -> np.ndarray:
    """Survival curve ``S(k) = prod_{j<=k} (1 - hazard_j)``.

    ``S(0) = 1`` by the empty-product convention and is not emitted.
    """
    return np.cumprod(1.0 - predict_hazard(model, covariates))


def evaluate(model, data: SurvivalDataset) -> float:
    """Unweighted log-likelihood of ``data`` under a fitted or prior model.

    Validation always scores with the plain objective regardless of the
    lambda used when fitting.  ``model`` may be a :class:`FittedModel` or
    a :class:`PriorModel`; a longer model horizon than the data's is fine.
    """
    if isinstance(model, PriorModel):
        if model.tau < data.tau:
            raise TauMismatchError(f"prior covers {model.tau} periods, data needs {data.tau}")
        params = ParamVector(model.eta_hat[:data.tau], align_prior(model, data.schema))
        link = model.link
        usable = np.ones(data.tau, dtype=bool)
    else:
        if model.schema.names != data.schema.names:
            raise DimensionError("model and data covariate schemas differ")
        if model.tau < data.tau:
            raise TauMismatchError(f"model covers {model.tau} periods, data needs {data.tau}")
        params = ParamVector(model.params.eta[:data.tau], model.params.beta)
        link = model.link
        usable = model.estimable[:data.tau]
    table = expand_person_period(data)
    if not usable.all():
        touched = np.unique(table.period) - 1
        missing = touched[~usable[touched]]
        if missing.size:
            raise UnestimablePeriodError(
                f"data occupies periods with undefined baseline: {(missing + 1).tolist()}"
            )
    return log_likelihood(params, table, link)
