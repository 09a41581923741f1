"""Objective, gradient and Hessian of the discrete-time fit.

One evaluation path serves both the plain log-likelihood and its
prior-weighted variant: the weighted form replaces each binary death
indicator ``d`` with the pseudo-response ``(d + lam * p) / (1 + lam)``
built from the prior's per-row prediction ``p``.  At ``lam = 0`` the
pseudo-responses equal ``d`` bit for bit, so the two objectives agree
exactly, not merely to rounding.

Per row the contribution is ``r * log(g) + (1 - r) * log(1 - g)`` with
``g`` the hazard of the row's linear predictor, which is the standard
binary-response form of ``r * log(g / (1 - g)) + log(1 - g)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import PersonPeriodTable
from .errors import AlignmentError, DimensionError
from .links import Link


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Joint parameter: per-period baselines ``eta``, then coefficients ``beta``."""

    eta: np.ndarray
    beta: np.ndarray

    def __post_init__(self) -> None:
        eta = np.atleast_1d(np.asarray(self.eta, dtype=float))
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if eta.ndim != 1 or beta.ndim != 1:
            raise DimensionError("eta and beta must be 1-d vectors")
        if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(beta))):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "beta", beta)

    @property
    def n_periods(self) -> int:
        return int(self.eta.shape[0])

    @property
    def n_covariates(self) -> int:
        return int(self.beta.shape[0])

    def as_array(self) -> np.ndarray:
        """Flat ``(eta_1..eta_tau, beta_1..beta_p)`` copy."""
        return np.concatenate([self.eta, self.beta])

    @classmethod
    def from_array(cls, arr: np.ndarray, tau: int) -> "ParamVector":
        arr = np.asarray(arr, dtype=float)
        return cls(arr[:tau], arr[tau:])


def pseudo_responses(death: np.ndarray, prior_preds: np.ndarray, lam: float) -> np.ndarray:
    """Blend observed indicators with prior predictions: ``(d + lam*p) / (1+lam)``.

    At ``lam = 0`` this returns values bitwise equal to ``death``.
    """
    if not np.isfinite(lam) or lam < 0.0:
        raise ValueError(f"lambda must be a finite non-negative real, got {lam!r}")
    preds = np.asarray(prior_preds, dtype=float)
    if preds.shape != death.shape:
        raise AlignmentError(
            f"prior predictions have shape {preds.shape}, table expects {death.shape}"
        )
    if np.any((preds <= 0.0) | (preds >= 1.0)) or not np.all(np.isfinite(preds)):
        raise ValueError("prior predictions must lie strictly inside (0, 1)")
    return (death + lam * preds) / (1.0 + lam)


def _check_dims(params: ParamVector, table: PersonPeriodTable) -> None:
    if params.n_periods != table.tau:
        raise DimensionError(f"eta has {params.n_periods} periods, table has tau={table.tau}")
    if params.n_covariates != table.covariates.shape[1]:
        raise DimensionError(
            f"beta has {params.n_covariates} entries, table rows carry "
            f"{table.covariates.shape[1]} covariates"
        )


def _evaluate(
    eta: np.ndarray,
    beta: np.ndarray,
    table: PersonPeriodTable,
    link: Link,
    resp: np.ndarray,
    *,
    want_grad: bool = False,
    want_hess: bool = False,
):
    """Value (and optionally derivatives) of the response-weighted objective.

    Returns ``(value, grad, hess)`` where the unrequested pieces are None.
    The parameter order is ``eta_1..eta_tau`` then ``beta_1..beta_p``.
    """
    period0 = table.period - 1
    psi = eta[period0] + table.covariates @ beta
    g = link.inverse(psi)
    one_m = 1.0 - g
    value = float(resp @ np.log(g) + (1.0 - resp) @ np.log(one_m))
    if not (want_grad or want_hess):
        return value, None, None
    tau = eta.shape[0]
    gp = link.inverse_derivative(psi)
    w1 = resp * gp / g - (1.0 - resp) * gp / one_m
    grad = np.concatenate(
        [np.bincount(period0, weights=w1, minlength=tau), table.covariates.T @ w1]
    )
    if not want_hess:
        return value, grad, None
    gpp = link.inverse_second_derivative(psi)
    w2 = resp * (gpp * g - gp * gp) / (g * g) - (1.0 - resp) * (
        gpp * one_m + gp * gp
    ) / (one_m * one_m)
    p = beta.shape[0]
    h_ee = np.zeros((tau, tau))
    np.fill_diagonal(h_ee, np.bincount(period0, weights=w2, minlength=tau))
    weighted = table.covariates * w2[:, None]
    h_eb = np.zeros((tau, p))
    np.add.at(h_eb, period0, weighted)
    h_bb = table.covariates.T @ weighted
    hess = np.block([[h_ee, h_eb], [h_eb.T, h_bb]])
    return value, grad, hess


def log_likelihood(params: ParamVector, table: PersonPeriodTable, link: Link) -> float:
    """Unweighted objective: the binary-response log-likelihood of the table."""
    _check_dims(params, table)
    value, _, _ = _evaluate(params.eta, params.beta, table, link, table.death)
    return value


def weighted_log_likelihood(
    params: ParamVector,
    table: PersonPeriodTable,
    prior_preds: np.ndarray,
    lam: float,
    link: Link,
) -> float:
    """Prior-weighted objective; identical to ``log_likelihood`` at ``lam = 0``."""
    _check_dims(params, table)
    resp = pseudo_responses(table.death, prior_preds, lam)
    value, _, _ = _evaluate(params.eta, params.beta, table, link, resp)
    return value


def _responses(table: PersonPeriodTable, prior_preds, lam: float) -> np.ndarray:
    if prior_preds is None:
        if lam != 0.0:
            raise ValueError("lam must be 0 when no prior predictions are given")
        return table.death
    return pseudo_responses(table.death, prior_preds, lam)


def gradient(
    params: ParamVector,
    table: PersonPeriodTable,
    link: Link,
    prior_preds: np.ndarray | None = None,
    lam: float = 0.0,
) -> np.ndarray:
    """Analytic gradient with respect to ``(eta_1..eta_tau, beta_1..beta_p)``."""
    _check_dims(params, table)
    resp = _responses(table, prior_preds, lam)
    _, grad, _ = _evaluate(params.eta, params.beta, table, link, resp, want_grad=True)
    return grad


def hessian(
    params: ParamVector,
    table: PersonPeriodTable,
    link: Link,
    prior_preds: np.ndarray | None = None,
    lam: float = 0.0,
) -> np.ndarray:
    """Analytic Hessian; negative semidefinite everywhere for the logit link."""
    _check_dims(params, table)
    resp = _responses(table, prior_preds, lam)
    _, _, hess = _evaluate(
        params.eta, params.beta, table, link, resp, want_grad=True, want_hess=True
    )
    return hess
