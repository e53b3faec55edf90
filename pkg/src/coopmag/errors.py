"""Exception hierarchy.

Every error raised by the library derives from :class:`CoopmagError`. The CLI
maps the three families below to process exit codes (2, 3 and 4).
"""

from __future__ import annotations


class CoopmagError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(CoopmagError):
    exit_code = 2


class NumericalError(CoopmagError):
    exit_code = 3


class OutputError(CoopmagError):
    exit_code = 4


# -- parameters -------------------------------------------------------------


class NonPositiveParameter(ConfigError, ValueError):
    pass


class GapExceedsQubitFrequency(ConfigError, ValueError):
    """The qubit frequency does not exceed the spin-wave gap.

    The one-magnon emission channel is closed and the characteristic
    wavelength is undefined.
    """


class MissingTransportParameters(ConfigError, ValueError):
    pass


class ConfigValidation(ConfigError, ValueError):
    """Invalid scenario configuration.

    ``field_errors`` maps a dotted field path to a message.
    """

    def __init__(self, field_errors: dict[str, str]):
        self.field_errors = dict(field_errors)
        lines = [f"{k}: {v}" for k, v in sorted(self.field_errors.items())]
        super().__init__("invalid configuration\n  " + "\n  ".join(lines))


# -- numerics ---------------------------------------------------------------


class DomainError(NumericalError, ValueError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class SingularPoint(NumericalError, ValueError):
    pass


class CoincidentQubits(NumericalError, ValueError):
    pass


class EigensolverFailure(NumericalError):
    pass


class StepSizeUnderflow(NumericalError):
    pass


class DimensionTooLarge(NumericalError, ValueError):
    pass


class DimensionMismatch(NumericalError, ValueError):
    pass


class DisorderSamplingExhausted(NumericalError):
    pass
