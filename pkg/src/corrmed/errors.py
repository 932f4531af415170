"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: validation problems (bad input shape,
unparseable files, missing arguments) exit with 2, numerical failures
(singular systems, degenerate residuals, optimizer breakdown) with 3, and
I/O errors with 4.
"""


class CorrmedError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CorrmedError):
    """Input fails a structural precondition."""


class LengthMismatch(ValidationError):
    """Treatment, mediator, and outcome vectors differ in length."""


class DegenerateTreatment(ValidationError):
    """Treatment vector is constant, so no contrast exists."""


class TooFewTrials(ValidationError):
    """Fewer observations than the minimum the estimators require."""


class MissingDelta(ValidationError):
    """A method that needs a fixed error correlation was called without one."""


class ParseError(ValidationError):
    """A data or config file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownQuantity(ValidationError):
    """An interval or summary was requested for a quantity we do not track."""


class NumericalError(CorrmedError):
    """Base class for runtime numerical failures."""


class SingularDesign(NumericalError):
    """The regression design is rank deficient (e.g. mediator collinear with treatment)."""


class SingularResiduals(NumericalError):
    """Residual second moments are degenerate (zero mediator noise)."""


class NegativeVariance(NumericalError):
    """A variance estimate came out negative beyond rounding slack."""


class OptimFailed(NumericalError):
    """An optimizer returned no usable candidate (all evaluations non-finite)."""


class ReplicateFailure(NumericalError):
    """Too many bootstrap replicates failed to refit."""


class AllEqualReplicates(NumericalError):
    """Every bootstrap replicate produced the same value; the percentile
    interval is degenerate (callers collapse it to zero width)."""
