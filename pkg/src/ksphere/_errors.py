"""Exception types shared across the package."""


class KsphereError(Exception):
    """Base class for all package-specific errors."""


class PoleError(KsphereError):
    """Evaluation requested at a pole of the function."""


class ParameterError(KsphereError):
    """Parameter combination is outside the defined range."""


class DomainError(KsphereError):
    """Argument lies outside the admissible domain."""


class SingularDivisorError(KsphereError):
    """A map divisor is too close to zero to evaluate stably."""


class DimensionMismatchError(KsphereError):
    """Input array length does not match the expected dimension."""


class RangeError(KsphereError):
    """Quantum number or index outside the admissible range."""


class DegenerateAngleError(KsphereError):
    """Angle extraction attempted at a degenerate configuration."""


class KindError(KsphereError):
    """Operation not defined for the requested map kind."""


class NonTangentError(KsphereError):
    """Displacement vector does not satisfy the tangency constraint."""


class SelectionRuleError(KsphereError):
    """Quantum numbers violate a reduction selection rule."""


class QuadratureOrderError(KsphereError):
    """Quadrature order too low for the requested inner product."""


class NonDecayingIntegrandError(KsphereError):
    """Contour integrand does not decay for the given parameters."""
