"""Exceptions raised by subreak."""


class SubreakError(Exception):
    """Base class for all subreak errors."""


class InvalidArgumentError(SubreakError, ValueError):
    """A precondition on an argument is violated. The message names the
    offending field."""


class PropagationOverflowError(SubreakError, OverflowError):
    """The raw norm of a propagated state left the representable range, or a
    single-shot propagation was requested beyond the allowed exponent."""


class DegenerateModeError(SubreakError, ValueError):
    """The two largest growth rates of a generator coincide, so no unique
    dominant mode exists."""


class ExperimentError(SubreakError, RuntimeError):
    """An experiment could not produce its result (no collapse within the
    horizon, too many non-absorbed trials, ...)."""


class ConfigError(SubreakError, ValueError):
    """A run configuration is malformed: unknown, missing or ill-typed keys."""


__all__ = ['SubreakError',
           'InvalidArgumentError',
           'PropagationOverflowError',
           'DegenerateModeError',
           'ExperimentError',
           'ConfigError']
