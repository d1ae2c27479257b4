from typing import Optional

from config import EXIT_HYPOTHESIS, EXIT_INPUT, EXIT_PRECONDITION, EXIT_RESIDUAL


class LabError(Exception):
    """Base class, carries the process exit code"""

    exit_code = EXIT_RESIDUAL


# Input errors


class InputError(LabError):
    exit_code = EXIT_INPUT


class PresentationError(InputError):
    """Malformed presentation file"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InconsistentPresentation(InputError):
    pass


class NonUnimodular(InputError):
    pass


class ConfigError(InputError):
    pass


# Precondition violations


class PreconditionError(LabError):
    exit_code = EXIT_PRECONDITION


class NotLoxodromic(PreconditionError):
    pass


class BelowAbscissa(PreconditionError):
    pass


class NonpositiveLength(PreconditionError):
    pass


class TransformPole(PreconditionError):
    pass


class GammaPole(TransformPole):
    pass


class ShapeError(PreconditionError):
    pass


class DegenerateDenominator(PreconditionError):
    pass


class PoleAtOne(PreconditionError):
    pass


class NoCuspData(PreconditionError):
    pass


# Hypothesis violations


class HypothesisFailed(LabError):
    exit_code = EXIT_HYPOTHESIS


class NotAcyclic(HypothesisFailed):
    pass


# Numerical failures


class NoConvergence(LabError):
    exit_code = EXIT_RESIDUAL
