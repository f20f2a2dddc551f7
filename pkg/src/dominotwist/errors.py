"""Exception taxonomy.

Three base classes map onto the CLI exit codes: InvalidInput -> 1,
ResourceBound -> 2, InvariantViolation -> 3.  Everything raised on purpose by
this package derives from one of them.
"""


class DominoError(Exception):
    """Common ancestor for all package errors."""

    exit_code = 3


class InvalidInput(DominoError):
    """The caller supplied data the engine cannot accept."""

    exit_code = 1


class ResourceBound(DominoError):
    """A configured size bound would be exceeded; raised before allocating."""

    exit_code = 2


class InvariantViolation(DominoError):
    """An internal consistency check failed; never valid data."""

    exit_code = 3


# -- invalid input -----------------------------------------------------------

class Empty(InvalidInput):
    """Region text contains no cells."""


class Unbalanced(InvalidInput):
    """Region has unequal numbers of white and black cells."""


class Disconnected(InvalidInput):
    """Region cells do not form a single edge-connected piece."""


class NotSimplyConnected(InvalidInput):
    """Region has at least one hole (Euler characteristic != 1)."""


class NotOnUnitCircle(InvalidInput):
    """Evaluation point for a polynomial matrix must satisfy |z| = 1."""


# -- resource bounds ---------------------------------------------------------

class TableTooLarge(ResourceBound):
    """The plug table would exceed the configured bound."""


class EnumerationTooLarge(ResourceBound):
    """A full tiling enumeration would exceed the configured bound."""


# -- invariant violations ----------------------------------------------------

class CocycleNotClosed(InvariantViolation):
    """A closed-path exponent is not a multiple of the cocycle denominator."""


class IntegralityViolation(InvariantViolation):
    """The twist of a closed tiling came out non-integer."""


class ConnectorNotFound(InvariantViolation):
    """No connector tiling exists for a plug that should admit one."""


class NoKernelPasses(InvariantViolation):
    """Calibration rejected every kernel candidate."""


class MultipleKernelsPass(InvariantViolation):
    """Calibration accepted more than one kernel candidate."""


class NotPrimitive(InvariantViolation):
    """Transfer matrix is not primitive (some power fails to be positive)."""


class CurvatureNonNegative(InvariantViolation):
    """Second derivative of the leading eigenvalue curve is not negative."""
