"""Exception types shared across the package."""

from __future__ import annotations


class KlsurvError(Exception):
    """Base class for all errors raised by klsurv."""


class DomainError(KlsurvError):
    """A value lies outside the admissible domain of a link function."""


class DimensionError(KlsurvError):
    """Array or parameter dimensions do not match the data they describe."""


class TauMismatchError(DimensionError):
    """A model's period horizon is too short for the data it must cover."""


class AlignmentError(KlsurvError):
    """Prior predictions or coefficients cannot be aligned to the data."""


class UnknownCovariateError(AlignmentError):
    """The prior references covariates absent from the local schema."""

    def __init__(self, names):
        self.names = tuple(names)
        joined = ", ".join(self.names)
        super().__init__(f"prior covariates not in local schema: {joined}")


class NoEventsError(KlsurvError):
    """The dataset contains no observed events."""


class SingularHessianError(KlsurvError):
    """A parameter is structurally unidentified by the data."""

    def __init__(self, index: int, detail: str = ""):
        self.index = int(index)
        msg = f"singular information for parameter index {self.index}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class UnestimablePeriodError(DomainError):
    """A hazard was requested for a period with no estimated baseline."""


class DegenerateFoldError(KlsurvError):
    """A cross-validation training split contains no events."""

    def __init__(self, fold: int):
        self.fold = int(fold)
        super().__init__(f"training split for fold {self.fold} contains no events")


class DataFileError(KlsurvError):
    """An input file failed validation; carries a location diagnostic."""

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column!r}"
            loc = f" ({loc})"
        elif column is not None:
            loc = f" (column {column!r})"
        super().__init__(f"{message}{loc}")
