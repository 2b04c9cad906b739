"""Significance arithmetic on arbitrary-precision complex values.

A :class:`SigComplex` carries, alongside its numeric value, an integer
*accuracy*: the number of digits right of the decimal point that are
considered reliable.  *Precision* is the total count of reliable
significant digits, i.e. accuracy plus the digit count left of the
decimal point.  A value whose precision reaches zero has no reliable
digits and is treated as numerically zero; comparisons between values go
through :func:`is_numerically_zero` of their difference, never raw
equality.

Propagation table (worst case, deterministic):

==============  ==================================================
operation       result accuracy
==============  ==================================================
a + b, a - b    min(accuracy(a), accuracy(b))
a * b, a / b    min(precision(a), precision(b)) - scale(result)
-a, conj(a)     accuracy(a)
a ** k, roots   precision(a) - scale(result)
==============  ==================================================

with scale(x) = floor(log10 |x|) + 1, the digit count left of the
decimal point (negative for |x| < 0.1, zero for x = 0).

All numeric work is done with mpmath at a working precision a few guard
digits above the declared precision, so identical inputs produce
bit-identical outputs.  Values are immutable.
"""
from __future__ import annotations

from fractions import Fraction

import mpmath
from mpmath import mpc, mpf

from .errors import ParseError

#: extra mpmath digits carried above the declared precision
GUARD_DIGITS = 10

#: default working precision in digits; the operating range goes up to
#: several thousand digits for hard inputs
DEFAULT_PRECISION = 400

_LOG10_2 = 0.30102999566398119521


def scale(value) -> int:
    """Digits left of the decimal point of ``value`` (0 for zero).

    ``scale(2.5) == 1``, ``scale(0.003) == -2``, ``scale(123) == 3``.
    """
    m = abs(value)
    if m == 0:
        return 0
    # binary magnitude -> decimal, corrected at the boundary
    e = int(mpmath.mag(m)) * _LOG10_2
    k = int(mpmath.floor(e))
    for cand in (k + 1, k, k + 2, k - 1):
        if mpf(10) ** (cand - 1) <= m < mpf(10) ** cand:
            return cand
    return k + 1  # pragma: no cover


class SigComplex:
    """Immutable arbitrary-precision complex value with an accuracy budget.

    ``dps`` is the mpmath working precision (decimal digits) the value was
    created under; arithmetic between operands uses the smaller of the two.
    """

    __slots__ = ("value", "accuracy", "dps")

    def __init__(self, value, accuracy: int, dps: int):
        with mpmath.workdps(int(dps) + GUARD_DIGITS):
            object.__setattr__(self, "value", mpc(value))
        object.__setattr__(self, "accuracy", int(accuracy))
        object.__setattr__(self, "dps", int(dps))

    def __setattr__(self, *a):  # immutability
        raise AttributeError("SigComplex is immutable")

    # -- derived quantities -------------------------------------------------

    @property
    def precision(self) -> int:
        """Total reliable significant digits (never negative)."""
        if self.value == 0:
            return max(0, self.accuracy)
        return max(0, self.accuracy + scale(self.value))

    @property
    def re(self):
        return self.value.real

    @property
    def im(self):
        return self.value.imag

    def magnitude(self):
        with mpmath.workdps(self.dps):
            return abs(self.value)

    # -- construction helpers ----------------------------------------------

    @classmethod
    def exact(cls, value, dps: int) -> "SigComplex":
        """Wrap an integer/rational/mp value assumed exact at ``dps``."""
        with mpmath.workdps(dps + GUARD_DIGITS):
            if isinstance(value, Fraction):
                v = mpc(mpf(value.numerator) / mpf(value.denominator))
            else:
                v = mpc(value)
        return cls(v, dps, dps)

    def _coerce(self, other) -> "SigComplex":
        if isinstance(other, SigComplex):
            return other
        if isinstance(other, (int, Fraction)) or isinstance(other, (mpf, mpc, float, complex)):
            return SigComplex.exact(other, self.dps)
        raise TypeError(f"cannot mix SigComplex with {type(other)!r}")

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        dps = min(self.dps, other.dps)
        with mpmath.workdps(dps + GUARD_DIGITS):
            v = self.value + other.value
        return SigComplex(v, min(self.accuracy, other.accuracy), dps)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        dps = min(self.dps, other.dps)
        with mpmath.workdps(dps + GUARD_DIGITS):
            v = self.value - other.value
        return SigComplex(v, min(self.accuracy, other.accuracy), dps)

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __neg__(self):
        return SigComplex(-self.value, self.accuracy, self.dps)

    def conjugate(self):
        return SigComplex(mpc(self.value.real, -self.value.imag), self.accuracy, self.dps)

    def __mul__(self, other):
        other = self._coerce(other)
        dps = min(self.dps, other.dps)
        with mpmath.workdps(dps + GUARD_DIGITS):
            v = self.value * other.value
        prec = min(self.precision, other.precision)
        return SigComplex(v, prec - scale(v), dps)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        dps = min(self.dps, other.dps)
        with mpmath.workdps(dps + GUARD_DIGITS):
            v = self.value / other.value
        prec = min(self.precision, other.precision)
        return SigComplex(v, prec - scale(v), dps)

    def __rtruediv__(self, other):
        return self._coerce(other).__truediv__(self)

    def __pow__(self, k):
        """Integer or rational power; rational powers use the principal
        branch."""
        with mpmath.workdps(self.dps + GUARD_DIGITS):
            if isinstance(k, Fraction) and k.denominator != 1:
                v = _principal_power(self.value, k)
            else:
                v = self.value ** int(k)
        return SigComplex(v, self.precision - scale(v), self.dps)

    def nth_root(self, n: int) -> "SigComplex":
        """Principal n-th root: exp(log(z)/n), argument in (-pi, pi]."""
        return self.__pow__(Fraction(1, n))

    def __repr__(self):
        return f"SigComplex({to_text(self)})"


def _principal_power(v, q: Fraction):
    if v == 0:
        return mpc(0)
    return mpmath.exp(mpmath.log(v) * (mpf(q.numerator) / mpf(q.denominator)))


# -- module-level operations ------------------------------------------------


def make(re_text: str, im_text: str, precision: int) -> SigComplex:
    """Build a SigComplex from decimal strings at the given precision.

    The accuracy budget is initialised as ``precision - scale``, i.e. the
    requested significant digits distributed around the decimal point.
    """
    if precision < 1:
        raise ValueError("precision must be >= 1")
    try:
        with mpmath.workdps(precision + GUARD_DIGITS):
            v = mpc(mpf(re_text.strip()), mpf(im_text.strip()))
    except Exception as exc:
        raise ParseError(f"bad decimal text {re_text!r}/{im_text!r}: {exc}") from None
    return SigComplex(v, precision - scale(v), precision)


def is_numerically_zero(x: SigComplex, working_accuracy: int) -> bool:
    """True iff ``x`` has no significant digits at the given accuracy.

    Reducing the accuracy budget to ``working_accuracy`` leaves zero
    precision exactly when |x| < 10^(-working_accuracy).
    """
    if x.value == 0:
        return True
    with mpmath.workdps(x.dps):
        return abs(x.value) < mpf(10) ** (-working_accuracy)


def reduce_accuracy(x: SigComplex, digits: int) -> SigComplex:
    """Cap the accuracy budget at ``digits``; never increases it.

    The stored numeric value is unchanged -- the budget alone decides how
    many of its decimals downstream comparisons may trust.
    """
    if digits < 0:
        raise ValueError("digits must be >= 0")
    if digits >= x.accuracy:
        return x
    return SigComplex(x.value, digits, x.dps)


def root_of_unity(j: int, d: int, dps: int) -> SigComplex:
    """exp(2*pi*i*j/d) at the given working precision."""
    j %= d
    if j == 0:
        return SigComplex.exact(1, dps)
    with mpmath.workdps(dps + GUARD_DIGITS):
        v = mpmath.expjpi(mpf(2 * j) / d)
    return SigComplex(v, dps, dps)


# -- decimal text I/O -------------------------------------------------------
#
# File formats annotate every number with its precision: ``2.5@400`` for a
# real value, ``1.5,-0.25@120`` for a complex one.


def _num_str(v, dps):
    return mpmath.nstr(v, dps + 5, strip_zeros=True, min_fixed=1, max_fixed=0)


def to_text(x: SigComplex) -> str:
    with mpmath.workdps(x.dps + GUARD_DIGITS):
        r = _num_str(x.value.real, x.dps)
        if x.value.imag == 0:
            return f"{r}@{x.dps}"
        return f"{r},{_num_str(x.value.imag, x.dps)}@{x.dps}"


def from_text(text: str) -> SigComplex:
    """Parse ``re[,im]@precision`` text."""
    try:
        body, prec = text.rsplit("@", 1)
        precision = int(prec)
    except ValueError:
        raise ParseError(f"missing @precision annotation in {text!r}") from None
    parts = body.split(",")
    if len(parts) == 1:
        return make(parts[0], "0", precision)
    if len(parts) == 2:
        return make(parts[0], parts[1], precision)
    raise ParseError(f"bad complex literal {text!r}")
