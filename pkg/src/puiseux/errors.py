"""Exception taxonomy shared by all modules.

Escalation errors (:class:`PrecisionExhausted`, :class:`ToleranceError`)
carry machine-readable retry hints: the caller is expected to rerun with
more precision digits and/or more series terms.
"""


class PuiseuxError(Exception):
    """Base class for all package errors."""


class ParseError(PuiseuxError):
    """Malformed polynomial or number text."""


class PrecisionExhausted(PuiseuxError):
    """A computation ran out of significant digits.

    ``suggest_precision`` / ``suggest_terms`` hold retry hints; either may
    be ``None`` when only one knob is relevant.
    """

    def __init__(self, message, suggest_precision=None, suggest_terms=None):
        super().__init__(message)
        self.suggest_precision = suggest_precision
        self.suggest_terms = suggest_terms


class ToleranceError(PuiseuxError):
    """A nearest-value match failed its p_min/N tolerance.

    Usually means the series needs more terms or the integration a higher
    working precision.
    """

    def __init__(self, message, suggest_precision=None, suggest_terms=None):
        super().__init__(message)
        self.suggest_precision = suggest_precision
        self.suggest_terms = suggest_terms


class AmbiguousMatchError(PuiseuxError):
    """Nearest-value assignment was not injective."""


class DegenerateFiberError(PuiseuxError):
    """Fiber requested at a pole: the leading coefficient vanishes there."""


class NotSimpleRootError(PuiseuxError):
    """Newton iteration seeded at a multiple root of the characteristic
    equation."""


class IntegrationError(PuiseuxError):
    """Adaptive path integration failed (step-size underflow or a value
    left the trust region).  ``branch`` names the offending sheet when
    known."""

    def __init__(self, message, branch=None):
        super().__init__(message)
        self.branch = branch


class SheetJumpError(PuiseuxError):
    """Continued values could not be matched back onto the fiber; the
    integration may have hopped sheets or crossed an unprocessed
    singularity."""


class InvariantViolation(PuiseuxError):
    """Internal bookkeeping broke (cycle counts, partitions, exponent
    denominators).  Always a bug or a corrupted input, never a tuning
    issue."""
