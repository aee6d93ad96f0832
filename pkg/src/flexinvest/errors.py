"""Exception hierarchy shared by all modules."""


class FlexInvestError(Exception):
    """Base class for package errors."""


class ValidationError(FlexInvestError):
    """Input data failed a structural or range check."""


# scenario tree
class EmptySpec(ValidationError):
    pass


class ProbabilityNotNormalized(ValidationError):
    def __init__(self, where, total):
        self.where = where
        self.total = total
        super().__init__(f"conditional probabilities at {where} sum to {total!r}, expected 1")


class StageOutOfRange(FlexInvestError):
    pass


class EmptySeries(ValidationError):
    pass


class KExceedsN(ValidationError):
    pass


# system model
class NonPositiveLifetime(ValidationError):
    pass


# formulation
class InconsistentSpec(ValidationError):
    pass


class MissingPriceSeries(ValidationError):
    pass


class MissingAncestor(FlexInvestError):
    pass


class EmptyModel(FlexInvestError):
    pass


class NotOptimal(FlexInvestError):
    pass


# solver
class NumericalBreakdown(FlexInvestError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DimensionMismatch(FlexInvestError):
    pass


class MpsFormatError(FlexInvestError):
    pass


# data io
class SchemaError(ValidationError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        loc = ""
        if path is not None:
            loc += f"{path}"
        if line is not None:
            loc += f" (line {line})"
        super().__init__(f"{loc}: {message}" if loc else message)


class MissingSeries(ValidationError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"missing series data for key {key!r}")


class RangeError(ValidationError):
    def __init__(self, field, value, allowed):
        self.field = field
        self.value = value
        super().__init__(f"{field}={value!r} outside allowed range {allowed}")


class ParseError(ValidationError):
    pass


class GapError(ValidationError):
    def __init__(self, step, key=None):
        self.step = step
        self.key = key
        where = f" for key {key!r}" if key is not None else ""
        super().__init__(f"missing step {step}{where}")


class ShapeMismatch(ValidationError):
    pass


class IoError(FlexInvestError):
    """Output could not be written."""
