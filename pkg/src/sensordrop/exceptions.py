"""Exception hierarchy shared by all sensordrop modules."""


class SensorDropError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(SensorDropError, ValueError):
    """Argument violates a documented precondition."""


class NumericError(SensorDropError, ArithmeticError):
    """A numerical routine failed (singular or indefinite matrix, negative MI, ...)."""


class NotPositiveDefiniteError(NumericError):
    """Cholesky factorization failed.

    ``minor`` is the 1-based order of the leading minor that is not positive.
    """

    def __init__(self, minor, size):
        self.minor = int(minor)
        self.size = int(size)
        super().__init__(
            f"matrix of size {size} is not positive definite: "
            f"leading minor of order {minor} is not positive"
        )


class DisconnectedGraphError(InvalidInputError):
    def __init__(self, u, v):
        self.pair = (int(u), int(v))
        super().__init__(f"graph is disconnected: no path between vertices {u} and {v}")


class PathValidationError(InvalidInputError):
    """A route is not a valid walk on the graph."""


class EnumerationRefused(SensorDropError):
    """Brute-force search declined because the instance exceeds its size guard."""

    def __init__(self, message, size_report):
        self.size_report = dict(size_report)
        super().__init__(message)


class ScenarioError(InvalidInputError):
    """Scenario document failed validation; ``location`` is a JSON path."""

    def __init__(self, location, message):
        self.location = location
        super().__init__(f"{location}: {message}")
