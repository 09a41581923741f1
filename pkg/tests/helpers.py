"""Independent oracles and instance generators shared by the test modules.

These deliberately avoid the package's vectorized evaluation paths: the
likelihood oracle walks risk and death sets subject by subject in pure
Python, and the derivative oracles are central finite differences of the
functions they check.
"""

from __future__ import annotations

import math

import numpy as np

from klsurv import ParamVector, SurvivalDataset, get_link


def product_form_log_likelihood(data: SurvivalDataset, params: ParamVector, link) -> float:
    """Log of the product-form likelihood by direct risk/death-set enumeration.

    For each period k, subjects still under observation form the risk set;
    those whose event happens at k form the death set and contribute their
    hazard, everyone else in the risk set contributes one minus theirs.
    """
    total = 0.0
    for k in range(1, data.tau + 1):
        risk = [i for i, rec in enumerate(data.subjects) if rec.observed_time >= k]
        death = {
            i for i in risk
            if data.subjects[i].event and data.subjects[i].observed_time == k
        }
        for i in risk:
            rec = data.subjects[i]
            lam = float(link.inverse(params.eta[k - 1] + float(rec.covariates @ params.beta)))
            total += math.log(lam) if i in death else math.log(1.0 - lam)
    return total


def random_instance(rng, n=5, tau=3, p=2, link_kind="logit"):
    """A small random dataset plus admissible parameters for the given link."""
    X = rng.uniform(-1.0, 1.0, size=(n, p))
    times = rng.integers(1, tau + 1, size=n)
    events = rng.random(n) < 0.6
    if not events.any():
        events[int(rng.integers(n))] = True
    data = SurvivalDataset.from_arrays(times, events, X, tau=tau)
    if link_kind == "log":
        # keep every linear predictor safely negative
        eta = rng.uniform(-2.5, -1.5, size=tau)
        beta = rng.uniform(-0.2, 0.2, size=p)
    else:
        eta = rng.uniform(-1.5, 0.5, size=tau)
        beta = rng.uniform(-0.5, 0.5, size=p)
    return data, ParamVector(eta, beta)


def fd_gradient(func, x, h=1e-6):
    """Central finite differences of a scalar function."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for j in range(x.size):
        hi = x.copy()
        lo = x.copy()
        hi[j] += h
        lo[j] -= h
        out[j] = (func(hi) - func(lo)) / (2.0 * h)
    return out


def fd_jacobian(vec_func, x, h=1e-6):
    """Central finite differences of a vector function, one column per coordinate."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        hi = x.copy()
        lo = x.copy()
        hi[j] += h
        lo[j] -= h
        cols.append((vec_func(hi) - vec_func(lo)) / (2.0 * h))
    return np.stack(cols, axis=1)


def all_links():
    return [get_link(kind) for kind in ("logit", "log", "cloglog")]
