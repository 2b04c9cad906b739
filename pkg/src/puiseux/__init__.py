"""Fractional power series of algebraic functions and their radii of
convergence.

Given a bivariate polynomial f(z, w), the package expands every branch
of w(z) at the origin as a (possibly fractional-power) series and then
determines the exact ring of singular points at which each branch stops
converging, by numerically continuing the branch sheets up to each ring
and testing them against the local singular structure there.
"""

from .algebra import BiPoly, UniPoly, fiber, parse, serialize
from .continuation import (
    ContinuationReport,
    integrate_sheet,
    integrate_sheets,
    local_basis,
    radii,
    random_point_check,
    straddle_points,
)
from .errors import (
    AmbiguousMatchError,
    DegenerateFiberError,
    IntegrationError,
    InvariantViolation,
    NotSimpleRootError,
    ParseError,
    PrecisionExhausted,
    PuiseuxError,
    SheetJumpError,
    ToleranceError,
)
# note: the landscape() constructor stays at puiseux.landscape.landscape —
# re-exporting it here would shadow the submodule of the same name
from .landscape import Landscape, SingularPoint, SingularRing
from .numerics import SigComplex
from .polygon import normalize, polygon_tree
from .series import PuiseuxSeries, expand

__version__ = "0.1.0"

__all__ = [
    "AmbiguousMatchError",
    "BiPoly",
    "ContinuationReport",
    "DegenerateFiberError",
    "IntegrationError",
    "InvariantViolation",
    "Landscape",
    "NotSimpleRootError",
    "ParseError",
    "PrecisionExhausted",
    "PuiseuxError",
    "PuiseuxSeries",
    "SheetJumpError",
    "SigComplex",
    "SingularPoint",
    "SingularRing",
    "ToleranceError",
    "UniPoly",
    "expand",
    "fiber",
    "integrate_sheet",
    "integrate_sheets",
    "local_basis",
    "normalize",
    "parse",
    "polygon_tree",
    "radii",
    "random_point_check",
    "serialize",
    "straddle_points",
]
