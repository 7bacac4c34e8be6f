"""Exception types raised across the package."""


class FairAUCError(Exception):
    """Base class for package errors."""


class DataError(FairAUCError, ValueError):
    """Input data violates a structural requirement."""


class NumericError(FairAUCError, ArithmeticError):
    """A numerical routine could not produce a valid result."""


class SingularMatrix(NumericError):
    """Cholesky factorization hit a non-positive pivot.

    Attributes
    ----------
    pivot : int
        Zero-based index of the failing diagonal pivot.
    """

    def __init__(self, pivot, message=None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (pivot {pivot})")


class InsufficientSamples(DataError):
    """A (group, class) cell has fewer than two rows."""

    def __init__(self, group, label, count):
        self.group = group
        self.label = label
        self.count = count
        super().__init__(
            f"group {group!r}, class {label}: {count} rows, at least 2 required"
        )


class UnsupportedGroups(DataError):
    """The protected attribute does not have exactly two values."""


class NoViableCandidate(FairAUCError):
    """No unacquired candidate feature could be evaluated."""


class RangeError(FairAUCError, ValueError):
    """Requested target lies outside the achievable interval."""

    def __init__(self, target, low, high):
        self.target = target
        self.low = low
        self.high = high
        super().__init__(
            f"target {target:.12g} outside achievable interval [{low:.12g}, {high:.12g}]"
        )


class PerfectSeparationWarning(UserWarning):
    """Logistic fit hit perfect separation; weights are from the last iteration."""
