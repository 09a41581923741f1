"""Link functions mapping linear predictors to per-period hazards.

The model writes the hazard for subject ``i`` in period ``k`` as
``g(eta_k + x_i' beta)`` where ``g`` is the inverse of a strictly
increasing, twice differentiable link ``h``.  Three standard choices are
supported:

* ``logit``   -- discrete logistic model
* ``log``     -- discrete relative risk model (needs negative predictors)
* ``cloglog`` -- grouped relative risk model

All evaluators accept scalars or numpy arrays and vectorize elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DomainError

# Hazards are clamped to this band so the log terms of the objective stay
# finite even for extreme linear predictors.
HAZARD_EPS = 1e-12

LINK_KINDS = ("logit", "log", "cloglog")


@dataclass(frozen=True)
class Link:
    """A member of the link family, identified by its ``kind``."""

    kind: str

    def __post_init__(self) -> None:
        if self.kind not in LINK_KINDS:
            raise ValueError(f"unknown link {self.kind!r}; expected one of {LINK_KINDS}")

    def _check_admissible(self, x: np.ndarray) -> None:
        # exp(x) must stay below 1 for the log link to yield a probability
        if self.kind == "log" and np.any(x >= 0.0):
            raise DomainError("log link needs a linear predictor < 0")

    def inverse(self, x):
        """Hazard ``g(x) = h^{-1}(x)``, clamped into the open unit interval."""
        x = np.asarray(x, dtype=float)
        self._check_admissible(x)
        if self.kind == "logit":
            g = expit(x)
        elif self.kind == "log":
            g = np.exp(x)
        else:  # cloglog
            g = -np.expm1(-np.exp(x))
        return np.clip(g, HAZARD_EPS, 1.0 - HAZARD_EPS)

    def inverse_derivative(self, x):
        """Exact first derivative ``g'(x)`` (of the unclamped ``g``)."""
        x = np.asarray(x, dtype=float)
        self._check_admissible(x)
        if self.kind == "logit":
            g = expit(x)
            return g * (1.0 - g)
        if self.kind == "log":
            return np.exp(x)
        return np.exp(x - np.exp(x))

    def inverse_second_derivative(self, x):
        """Exact second derivative ``g''(x)``."""
        x = np.asarray(x, dtype=float)
        self._check_admissible(x)
        if self.kind == "logit":
            g = expit(x)
            return g * (1.0 - g) * (1.0 - 2.0 * g)
        if self.kind == "log":
            return np.exp(x)
        ex = np.exp(x)
        return np.exp(x - ex) * (1.0 - ex)

    def forward(self, p):
        """The link ``h(p)`` itself, defined for ``p`` strictly inside (0, 1)."""
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0.0) | (p >= 1.0)):
            raise DomainError("link argument must lie strictly inside (0, 1)")
        if self.kind == "logit":
            return np.log(p / (1.0 - p))
        if self.kind == "log":
            return np.log(p)
        return np.log(-np.log1p(-p))


LOGIT = Link("logit")
LOG = Link("log")
CLOGLOG = Link("cloglog")

_BY_NAME = {link.kind: link for link in (LOGIT, LOG, CLOGLOG)}


def get_link(name: str) -> Link:
    """Look up a link by name."""
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown link {name!r}; expected one of {LINK_KINDS}") from None


def link_inverse(link: Link, x):
    """Functional alias for :meth:`Link.inverse`."""
    return link.inverse(x)


def link_inverse_derivative(link: Link, x):
    """Functional alias for :meth:`Link.inverse_derivative`."""
    return link.inverse_derivative(x)
