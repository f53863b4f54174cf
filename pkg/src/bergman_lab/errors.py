"""Exception types shared across the package."""


class WeightDomainError(ValueError):
    """Evaluation outside [0,1) or invalid weight parameters."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge within the subdivision budget.

    Carries the best available partial value and its error estimate.
    """

    def __init__(self, message, partial_value=None, error_estimate=None):
        super().__init__(message)
        self.partial_value = partial_value
        self.error_estimate = error_estimate


class TruncationError(RuntimeError):
    """A series tail could not be certified below tolerance within d_max.

    Carries the partial sum and the degree at which summation stopped.
    """

    def __init__(self, message, partial_sum=None, degree_used=None, tail_bound=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.degree_used = degree_used
        self.tail_bound = tail_bound


class NumericRangeError(RuntimeError):
    """A quantity exceeds the double-precision range (|log value| > ~709)."""


class SymbolFormError(ValueError):
    """A custom symbol was not given in integrable slice form."""


class DescriptorError(ValueError):
    """A weight or symbol descriptor file failed to parse.

    `field` names the offending entry when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
