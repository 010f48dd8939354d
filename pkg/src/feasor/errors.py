"""Exception hierarchy shared by every feasor module."""


class FeasorError(Exception):
    """Base class for all library errors."""


class DimensionError(FeasorError, ValueError):
    """Vectors, weights or sets with incompatible dimensions."""


class NumericalError(FeasorError, ArithmeticError):
    """A non-finite iterate appeared during a fixed-point iteration."""


class InvalidSetError(FeasorError, ValueError):
    """A constraint set was constructed with invalid data."""


class SingularSystemError(FeasorError, ArithmeticError):
    """A linear system that must be nonsingular is (numerically) singular."""


class ParamError(FeasorError, ValueError):
    """An algorithm parameter lies outside its admissible range."""


class InvalidProblemError(FeasorError, ValueError):
    """An operator was requested for an unsuitable list of sets."""


class DegenerateTriangleError(FeasorError, ArithmeticError):
    """Three distinct collinear points have no circumcenter."""


class MissingShadowError(FeasorError, ValueError):
    """A solve report lacks the shadow point required downstream."""


class ConfigError(FeasorError, ValueError):
    """Invalid problem or run configuration."""


class NotValidAsReference(FeasorError, ValueError):
    """The minimum-norm quadratic is negative somewhere on the interval."""
