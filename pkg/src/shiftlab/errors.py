"""Exception types shared across the library.

Every error that a public operation can raise by contract lives here, so
callers can catch one family (``ShiftLabError``) or a specific failure.
"""

from __future__ import annotations


class ShiftLabError(Exception):
    """Base class for all library-specific failures."""


class NonConvergenceError(ShiftLabError):
    """An iterative factorization failed to converge or certify its result."""


class SingularInputError(ShiftLabError):
    """An operation requiring an invertible operator received a singular one.

    ``iteration`` is set when the failure occurred inside an iteration
    (the index of the offending iterate), otherwise it is None.
    """

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class NotPSDError(ShiftLabError):
    """Input expected to be Hermitian positive semidefinite is not."""


class NotHyperbolicError(ShiftLabError):
    """The operator has spectrum on (or numerically touching) the unit circle."""


class WindowTooLargeError(ShiftLabError):
    """A requested dense window exceeds the supported dimension cap."""


class UnboundedConjugatorError(ShiftLabError):
    """A diagonal conjugator must have equal tails to stay bounded with bounded inverse."""


class HorizonTooLargeError(ShiftLabError):
    """Requested orbit horizon exceeds the backend's supported range."""


class NotBoundedOrbitError(ShiftLabError):
    """Pseudo-orbit construction requires a vector with a (certified) bounded orbit."""


class DeltaTooLargeError(ShiftLabError):
    """The defect budget is too large relative to the orbit bound."""


class ConstantWeightsError(ShiftLabError):
    """A divergence certificate was requested for a fixed point (equal tails)."""


class NotHyponormalError(ShiftLabError):
    """The weight sequence is not nondecreasing."""


class TraceDivergedError(ShiftLabError):
    """An iteration trace never reached the requested gap tolerance."""


class ConfigInvalidError(ShiftLabError):
    """An experiment configuration failed validation.

    ``path`` locates the offending field, e.g. ``parameters.delta``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
