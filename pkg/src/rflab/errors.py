"""Exception hierarchy shared by all rflab modules."""


class RFLabError(Exception):
    """Base class for every error raised by rflab."""


class ConditioningFailure(RFLabError):
    """A kernel or Gram matrix could not be factorized even after jitter.

    Usually signals duplicate or near-duplicate inputs.
    """


class DegenerateTestPoint(RFLabError):
    """The test point lies in the span of the training points (r_perp ~ 0)."""


class DimensionMismatch(RFLabError, ValueError):
    pass


class SolverFailure(RFLabError):
    pass


class InvalidRegime(RFLabError, ValueError):
    """A formula was requested outside the parameter regime where it is defined."""


class ContractionViolated(RFLabError):
    """The expected projection E[P_W] is not a strict contraction."""


class ParseError(RFLabError, ValueError):
    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class InsufficientRows(RFLabError, ValueError):
    pass


class ConfigError(RFLabError, ValueError):
    def __init__(self, message, field=None):
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
