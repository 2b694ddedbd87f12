"""Regularizing duality maps on constant-curvature spheres.

Numerical library and command line tool for the generalized Levi-Civita,
Kustaanheimo-Stiefel, and Hurwitz transformations that realize the
Kepler-Coulomb / harmonic-oscillator correspondence on spheres, both for
classical trajectories and for quantum spectra and wavefunctions in
dimensions 2, 3, and 5.
"""

from . import _errors
from ._errors import (
    DegenerateAngleError,
    DimensionMismatchError,
    DomainError,
    KindError,
    KsphereError,
    NonDecayingIntegrandError,
    NonTangentError,
    ParameterError,
    PoleError,
    QuadratureOrderError,
    RangeError,
    SelectionRuleError,
    SingularDivisorError,
)

__version__ = "0.1.0"
