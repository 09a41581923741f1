"""Subject-level survival data and its person-period expansion."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class CovariateSchema:
    """Ordered covariate names shared by a dataset and every model fit to it."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        names = tuple(str(n) for n in self.names)
        if any(not n for n in names):
            raise ValueError("covariate names must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError("covariate names must be unique")
        object.__setattr__(self, "names", names)

    @property
    def p(self) -> int:
        return len(self.names)


@dataclass(frozen=True, eq=False)
class SubjectRecord:
    """One subject: last period observed, event flag, covariate vector.

    ``observed_time`` is the final period the subject was at risk in;
    ``event`` marks a death at that period (otherwise the subject is
    censored there).  Covariates are time-constant per subject.
    """

    id: object
    observed_time: int
    event: bool
    covariates: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "observed_time", int(self.observed_time))
        object.__setattr__(self, "event", bool(self.event))
        cov = np.asarray(self.covariates, dtype=float)
        if cov.ndim != 1:
            raise DimensionError("covariates must form a 1-d vector")
        if not np.all(np.isfinite(cov)):
            raise ValueError(f"subject {self.id!r} has non-finite covariates")
        if self.observed_time < 1:
            raise ValueError(f"subject {self.id!r} has observed_time < 1")
        object.__setattr__(self, "covariates", cov)


@dataclass(frozen=True, eq=False)
class SurvivalDataset:
    """Immutable collection of subjects with a common schema and horizon."""

    schema: CovariateSchema
    subjects: tuple[SubjectRecord, ...]
    tau: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "subjects", tuple(self.subjects))
        object.__setattr__(self, "tau", int(self.tau))
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        p = self.schema.p
        for rec in self.subjects:
            if rec.covariates.shape[0] != p:
                raise DimensionError(
                    f"subject {rec.id!r} carries {rec.covariates.shape[0]} covariates, schema has {p}"
                )
            if rec.observed_time > self.tau:
                raise ValueError(
                    f"subject {rec.id!r} observed at period {rec.observed_time}, beyond tau={self.tau}"
                )

    def __len__(self) -> int:
        return len(self.subjects)

    @property
    def n(self) -> int:
        return len(self.subjects)

    @cached_property
    def times(self) -> np.ndarray:
        return np.array([rec.observed_time for rec in self.subjects], dtype=np.int64)

    @cached_property
    def events(self) -> np.ndarray:
        return np.array([rec.event for rec in self.subjects], dtype=bool)

    @cached_property
    def covariate_matrix(self) -> np.ndarray:
        if not self.subjects:
            return np.zeros((0, self.schema.p))
        return np.stack([rec.covariates for rec in self.subjects])

    @property
    def n_events(self) -> int:
        return int(self.events.sum())

    def subset(self, selector) -> "SurvivalDataset":
        """New dataset restricted to a boolean mask or index array of subjects."""
        selector = np.asarray(selector)
        if selector.dtype == bool:
            selector = np.flatnonzero(selector)
        subjects = tuple(self.subjects[int(i)] for i in selector)
        return SurvivalDataset(self.schema, subjects, self.tau)

    @classmethod
    def from_arrays(
        cls,
        times: Sequence[int],
        events: Sequence[bool],
        covariates,
        names: Iterable[str] | None = None,
        ids: Sequence | None = None,
        tau: int | None = None,
    ) -> "SurvivalDataset":
        """Build a dataset from parallel arrays.

        ``covariates`` is an (n, p) matrix; ``names`` default to
        ``x1..xp``; ``ids`` default to row numbers; ``tau`` defaults to the
        largest observed time.
        """
        times = np.asarray(times, dtype=np.int64)
        events = np.asarray(events, dtype=bool)
        X = np.asarray(covariates, dtype=float)
        if X.ndim != 2 or X.shape[0] != times.shape[0] or events.shape[0] != times.shape[0]:
            raise DimensionError("times, events and covariate rows must align")
        p = X.shape[1]
        if names is None:
            names = [f"x{j + 1}" for j in range(p)]
        if ids is None:
            ids = list(range(times.shape[0]))
        schema = CovariateSchema(tuple(names))
        if tau is None:
            tau = int(times.max()) if times.size else 1
        subjects = tuple(
            SubjectRecord(ids[i], int(times[i]), bool(events[i]), X[i])
            for i in range(times.shape[0])
        )
        return cls(schema, subjects, tau)


@dataclass(frozen=True, eq=False)
class PersonPeriodTable:
    """Expanded (subject, period) rows.

    Each subject contributes one row per period ``1..observed_time``, so
    the materialized rows are exactly the at-risk rows (Y == 1) and no
    at-risk column is stored.  ``death`` is 1.0 only on a subject's final
    row and only when the subject's event flag is set.
    """

    subject_index: np.ndarray
    period: np.ndarray
    death: np.ndarray
    covariates: np.ndarray
    tau: int
    n_subjects: int

    @property
    def n_rows(self) -> int:
        return int(self.period.shape[0])

    @cached_property
    def period_counts(self) -> np.ndarray:
        """Number of at-risk rows per period (length ``tau``)."""
        return np.bincount(self.period - 1, minlength=self.tau)


def expand_person_period(data: SurvivalDataset) -> PersonPeriodTable:
    """Expand subject records into one at-risk row per (subject, period)."""
    times = data.times
    total = int(times.sum())
    subject_index = np.repeat(np.arange(len(data)), times)
    ends = np.cumsum(times)
    period = np.arange(1, total + 1, dtype=np.int64) - np.repeat(ends - times, times)
    death = np.zeros(total)
    if total:
        death[ends - 1] = data.events.astype(float)
    covariates = data.covariate_matrix[subject_index]
    return PersonPeriodTable(subject_index, period, death, covariates, data.tau, len(data))
