"""Exception and warning types raised by the engine."""


class MacintError(Exception):
    """Base class for engine errors."""


class ResolutionError(MacintError, ValueError):
    """A kernel or oscillation is not resolved by the grid."""


class PositivityError(MacintError, ValueError):
    """A coefficient that must stay positive dropped below its floor."""


class RegimeError(MacintError):
    """A stage precondition failed; the input is outside the working regime."""


class InitRegimeError(RegimeError):
    """The initial (q = 0) subsolution does not satisfy the stage preconditions."""


class NonContractionWarning(UserWarning):
    """Picard differences did not shrink from one iterate to the next."""


class MeanModeWarning(UserWarning):
    """A right-hand side with nonzero mean was projected onto mean-zero fields."""
