"""Exception hierarchy shared by all resmetrics modules."""


class ResMetricsError(Exception):
    """Base class for every error raised by this package."""


class EmptyClassError(ResMetricsError, ValueError):
    """A sample has zero total weight in one of the two classes."""


class IndexOutOfRangeError(ResMetricsError, IndexError):
    """Path index outside [-1, n_nodes)."""


class NotThresholdMetricError(ResMetricsError, ValueError):
    """Operation requires a per-threshold metric (AUC is path-global)."""


class InvalidPrevalenceError(ResMetricsError, ValueError):
    """Prevalence outside the open interval (0, 1)."""


class DomainError(ResMetricsError, ValueError):
    """Argument outside the mathematical domain of a special function."""


class SingularDensityError(ResMetricsError, ZeroDivisionError):
    """Likelihood ratio requested where the negative-class density vanishes."""


class NoRootBracketError(ResMetricsError, ArithmeticError):
    """The first-order-condition residual has no sign change on the scan interval."""


class DegenerateInputError(ResMetricsError, ValueError):
    """Statistic undefined for the given input (e.g. constant array)."""


class NonpositiveCostError(ResMetricsError, ValueError):
    """Misclassification costs must be strictly positive."""


class ParseError(ResMetricsError, ValueError):
    """A scores file row could not be parsed."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class RangeError(ResMetricsError, ValueError):
    """A scores file row carries a value outside its legal range."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MissingColumnError(ResMetricsError, ValueError):
    """A required column is absent from the scores file header."""
