"""
Exception hierarchy shared by every Lidarly module.

InputError subclasses mean the caller handed us something invalid (CLI exit 2).
NumericalError subclasses mean the numbers could not be made to work (CLI exit 3).
"""

from typing import Optional


class LidarlyError(Exception):
    """Base class for all Lidarly errors"""

    exit_code = 1

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        if index is not None:
            message = f"{message} (index {index})"
        super().__init__(message)


class InputError(LidarlyError):
    exit_code = 2


class NumericalError(LidarlyError):
    exit_code = 3


# Input / validation
class ConfigError(InputError):
    pass


class FormatError(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class EmptyMask(InputError):
    pass


class LengthMismatch(InputError):
    pass


class GridMismatch(InputError):
    pass


class NonPositiveDenominator(InputError):
    pass


# Numerical
class BehindCamera(NumericalError):
    pass


class TooFewCorrespondences(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass


class NoPositiveScale(NumericalError):
    pass


class Infeasible(NumericalError):
    pass


class Unbounded(NumericalError):
    pass


class NonPositiveDepth(NumericalError):
    pass
