"""Published prediction models and their alignment to local data.

A prior is a set of per-period baselines plus name-keyed coefficients
from earlier work.  Its role here is to produce a predicted outcome for
every person-period row of the local data; those predictions feed the
weighted objective as pseudo-response material.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import CovariateSchema, PersonPeriodTable
from .errors import AlignmentError, TauMismatchError, UnknownCovariateError
from .links import Link


@dataclass(frozen=True, eq=False)
class PriorModel:
    """A previously published model: baselines per period plus named coefficients.

    ``eta_hat`` must cover at least as many periods as any local horizon
    the prior will serve; coefficients may cover a subset of the local
    covariates (absent ones act as zero).
    """

    link: Link
    tau: int
    eta_hat: np.ndarray
    coefficients: dict[str, float]
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", int(self.tau))
        if self.tau < 1:
            raise ValueError("prior tau must be >= 1")
        eta = np.atleast_1d(np.asarray(self.eta_hat, dtype=float))
        if eta.ndim != 1 or eta.shape[0] != self.tau:
            raise ValueError(f"eta_hat must have length tau={self.tau}")
        if not np.all(np.isfinite(eta)):
            raise ValueError("eta_hat has non-finite entries")
        coef = {}
        for name, value in dict(self.coefficients).items():
            name = str(name)
            if not name:
                raise ValueError("coefficient names must be non-empty")
            value = float(value)
            if not np.isfinite(value):
                raise ValueError(f"coefficient {name!r} is non-finite")
            coef[name] = value
        object.__setattr__(self, "eta_hat", eta)
        object.__setattr__(self, "coefficients", coef)


def align_prior(prior: PriorModel, schema: CovariateSchema) -> np.ndarray:
    """Order the prior coefficients by the local schema, zero-filling absences.

    The supported shape is prior subset-of local: a prior naming a
    covariate the schema lacks raises :class:`UnknownCovariateError`.
    """
    known = set(schema.names)
    unknown = sorted(name for name in prior.coefficients if name not in known)
    if unknown:
        raise UnknownCovariateError(unknown)
    return np.array([prior.coefficients.get(name, 0.0) for name in schema.names], dtype=float)


def prior_predictions(
    prior: PriorModel, table: PersonPeriodTable, schema: CovariateSchema
) -> np.ndarray:
    """Per-row predicted outcomes under the prior, aligned with table rows.

    Predictions use the prior's own inverse link, so they are probabilities
    regardless of the link chosen for the local fit.  A prior with a longer
    horizon than the table simply has its extra periods ignored.
    """
    if table.covariates.shape[1] != schema.p:
        raise AlignmentError(
            f"table rows carry {table.covariates.shape[1]} covariates, schema has {schema.p}"
        )
    if prior.tau < table.tau:
        raise TauMismatchError(
            f"prior covers {prior.tau} periods but the table needs {table.tau}"
        )
    v = align_prior(prior, schema)
    psi = prior.eta_hat[table.period - 1] + table.covariates @ v
    return np.asarray(prior.link.inverse(psi))
