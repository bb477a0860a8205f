"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`SGPlateError`
so that the CLI can map it to an exit code.
"""


class SGPlateError(Exception):
    """Base class for library errors."""


class ConfigError(SGPlateError):
    pass


class ExperimentError(SGPlateError):
    """Numerical failure surfaced by an experiment."""


class EllipticityViolation(ExperimentError, ValueError):
    pass


class ConvexityViolation(ExperimentError):
    pass


class OutOfRange(ExperimentError, ValueError):
    pass


class SingularMap(ExperimentError):
    pass


class InsufficientSmoothness(ExperimentError):
    pass


class InvalidDegree(ExperimentError, ValueError):
    pass


class QuadratureUnderflow(ExperimentError):
    pass


class OrderTooHigh(ExperimentError, ValueError):
    pass


class SingularSystem(ExperimentError):
    pass


class IncompatibleData(ExperimentError):
    pass


class OriginSingular(ExperimentError, ValueError):
    pass


class SupportViolation(ExperimentError, ValueError):
    pass


class RadiusOutOfDomain(ExperimentError, ValueError):
    pass


class DegenerateDenominator(ExperimentError):
    pass


class RadiusOrdering(ExperimentError, ValueError):
    pass
