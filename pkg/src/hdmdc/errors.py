"""Exception hierarchy.

``DataError`` covers malformed inputs, ``NumericalError`` covers failures of
the numerics themselves, and ``ConfigError`` is raised for experiment
configuration problems. The CLI maps these to distinct exit codes.
"""


class HdmdcError(Exception):
    """Base class for all package errors."""


class DataError(HdmdcError, ValueError):
    pass


class NumericalError(HdmdcError, ArithmeticError):
    pass


class ConfigError(HdmdcError):
    pass


# time series ---------------------------------------------------------------
class MissingChannel(DataError):
    pass


class NonUniformSampling(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class ConstantChannel(DataError):
    pass


class UpsamplingRequested(DataError):
    pass


class WindowTooLong(DataError):
    pass


# embedding / estimator -----------------------------------------------------
class InsufficientHistory(DataError):
    pass


class LengthMismatch(DataError):
    pass


class WrongHistoryLength(DataError):
    pass


class InsufficientWarmup(DataError):
    pass


class InputTooShort(DataError):
    pass


class NoCrossings(DataError):
    pass


class SingularGram(NumericalError):
    pass


class NonFinite(NumericalError):
    pass


# ensemble ------------------------------------------------------------------
class InvalidBounds(DataError):
    pass


class TooFewSurvivors(NumericalError):
    pass


# metrics / statistics ------------------------------------------------------
class ShapeMismatch(DataError):
    pass


class ConstantReference(DataError):
    pass


class ConstantSeries(DataError):
    pass


class DegenerateSample(DataError):
    pass


class GridMismatch(DataError):
    pass


# waves / vessel ------------------------------------------------------------
class NonPositiveFrequency(DataError):
    pass


class AliasedBand(DataError):
    pass


class NoPositiveLagPeak(NumericalError):
    pass


class UnstableIntegration(NumericalError):
    pass


class InconsistentInput(DataError):
    pass
