"""Exception hierarchy shared by every module."""


class AlphaFareyError(Exception):
    """Base class for all errors raised by this package."""


class PartitionError(AlphaFareyError, ValueError):
    """Invalid partition parameters or tails.

    ``index`` names the first offending tail index when one exists.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class HorizonError(AlphaFareyError, IndexError):
    """An index beyond the partition horizon was requested."""


class DigitError(AlphaFareyError, ValueError):
    """Malformed or insufficient digit input."""


class HypothesisError(AlphaFareyError):
    """Inputs valid in isolation but outside the hypotheses of a result.

    Examples: asking for derivative classification on the dyadic partition,
    or a level ``s`` outside ``(s_minus, s_plus)``.
    """

    def __init__(self, message, hypothesis=None):
        super().__init__(message)
        self.hypothesis = hypothesis


class DivergenceError(AlphaFareyError, ArithmeticError):
    """A series diverges for every parameter in the searched region."""
