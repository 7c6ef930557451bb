"""Exception hierarchy.

Errors split in two families so the command line can map them onto exit
codes: bad input (2) versus numerical failure (3).
"""


class LadderError(Exception):
    """Base class for every error raised by ladder_synth."""


class InputError(LadderError, ValueError):
    """Malformed or out-of-range input (index range, parse failure, ...)."""


class DigestMismatch(InputError):
    """A program is replayed against a model or target it was not compiled for."""


class NumericError(LadderError, ArithmeticError):
    """A numerical procedure failed (no root, no convergence, singular system)."""


class NoRootError(NumericError):
    pass


class CompileError(NumericError):
    pass


class FitError(NumericError):
    pass


class UnderdeterminedError(NumericError):
    def __init__(self, message, unconstrained=()):
        super().__init__(message)
        self.unconstrained = list(unconstrained)


class UnphysicalCoherence(NumericError):
    pass
