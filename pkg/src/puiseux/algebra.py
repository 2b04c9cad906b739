"""Bivariate polynomials over Q, resultants, and multiprecision roots.

The central object is :class:`BiPoly`, the function

    f(z,w) = a_0(z) + a_1(z) w + ... + a_n(z) w^n

with exact rational coefficients.  Irreducibility over Q is an input
contract asserted by the caller; nothing here checks it.

Root finding is simultaneous Aberth-Ehrlich iteration on mpmath
complexes, with Newton-polygon (Bini-style) initial radii and phased
precision doubling, followed by per-root Newton polishing of well
separated roots.  Roots that stagnate against each other are exactly the
clusters that :func:`cluster` later merges.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import sympy
from mpmath import mpc, mpf
from sympy.parsing.sympy_parser import (
    implicit_multiplication_application,
    parse_expr,
    rationalize,
    standard_transformations,
)

from .errors import DegenerateFiberError, ParseError, PrecisionExhausted
from .numerics import GUARD_DIGITS, SigComplex, is_numerically_zero

_Z, _W = sympy.symbols("z w")
_TRANSFORMS = standard_transformations + (rationalize, implicit_multiplication_application)


# ---------------------------------------------------------------------------
# exact univariate polynomials


class UniPoly:
    """Dense univariate polynomial in z with exact Fraction coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    @property
    def degree(self) -> int:
        """Degree, -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def order(self) -> int:
        """Lowest z-power with nonzero coefficient; None if zero poly."""
        for k, c in enumerate(self.coeffs):
            if c != 0:
                return k
        return None

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return UniPoly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                        for i in range(n)])

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return UniPoly([c * other for c in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return UniPoly([])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> "UniPoly":
        """Multiply by z^k."""
        if not self.coeffs:
            return self
        return UniPoly((Fraction(0),) * k + self.coeffs)

    def derivative(self) -> "UniPoly":
        return UniPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def eval_exact(self, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_mpc(self, x, dps: int):
        """Horner evaluation at an mpmath complex point."""
        with mpmath.workdps(dps + GUARD_DIGITS):
            acc = mpc(0)
            for c in reversed(self.coeffs):
                acc = acc * x + _frac_to_mpf(c)
            return acc

    def to_sympy(self):
        return sum(sympy.Rational(c.numerator, c.denominator) * _Z ** k
                   for k, c in enumerate(self.coeffs))

    def __repr__(self):
        return f"UniPoly({list(self.coeffs)})"


def _frac_to_mpf(c: Fraction):
    if c.denominator == 1:
        return mpf(c.numerator)
    return mpf(c.numerator) / mpf(c.denominator)


# ---------------------------------------------------------------------------
# bivariate polynomials


class BiPoly:
    """f(z,w) = sum a_i(z) w^i with rational coefficients, a_n != 0."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[UniPoly]):
        cs = [c if isinstance(c, UniPoly) else UniPoly(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        if not cs:
            raise ValueError("zero polynomial is not a valid BiPoly")
        self.coeffs = tuple(cs)

    @property
    def degree_w(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> UniPoly:
        return self.coeffs[i] if i <= self.degree_w else UniPoly([])

    def partial_w(self) -> "BiPoly":
        return BiPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def partial_z(self) -> "BiPoly":
        return BiPoly([c.derivative() for c in self.coeffs])

    def eval_w_coeffs(self, z0, dps: int):
        """Coefficients of w -> f(z0, w) as mpmath complexes."""
        return [c.eval_mpc(z0, dps) for c in self.coeffs]

    def eval_mpc(self, z0, w0, dps: int):
        with mpmath.workdps(dps + GUARD_DIGITS):
            acc = mpc(0)
            for c in reversed(self.coeffs):
                acc = acc * w0 + c.eval_mpc(z0, dps)
            return acc

    def to_sympy(self):
        return sum(c.to_sympy() * _W ** i for i, c in enumerate(self.coeffs))

    def __eq__(self, other):
        return isinstance(other, BiPoly) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"BiPoly({serialize(self)!r})"


# ---------------------------------------------------------------------------
# parsing / serialization
#
# Canonical text: explicit `+`, rational `p/q` coefficients, `z^k`, `w^k`,
# e.g. "(78 + 49 z - 46 z^2) + (-2 z) w + (91 - 34 z - 80 z^2) w^2".
# The structured alternative is a JSON document {"coeffs": [[...], ...]}
# listing, per power of w, the z-coefficients as integers or "p/q" strings.


def parse(text: str) -> BiPoly:
    """Parse a polynomial expression or coefficient-list document."""
    text = text.strip()
    if text.startswith("{"):
        return _parse_doc(text)
    try:
        expr = parse_expr(text.replace("^", "**"), local_dict={"z": _Z, "w": _W},
                          transformations=_TRANSFORMS, evaluate=True)
        poly = sympy.Poly(sympy.expand(expr), _W, _Z)
    except Exception as exc:
        raise ParseError(f"cannot parse polynomial: {exc}") from None
    return from_sympy(poly)


def _parse_doc(text: str) -> BiPoly:
    try:
        doc = json.loads(text)
        rows = doc["coeffs"]
        return BiPoly([UniPoly([Fraction(str(c)) for c in row]) for row in rows])
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"bad coefficient document: {exc}") from None


def from_sympy(poly) -> BiPoly:
    poly = sympy.Poly(poly, _W, _Z)
    n = poly.degree(_W)
    rows = [[Fraction(0)] for _ in range(n + 1)]
    for (i, k), c in poly.terms():
        c = sympy.Rational(c)
        row = rows[i]
        while len(row) <= k:
            row.append(Fraction(0))
        row[k] = Fraction(int(c.p), int(c.q))
    return BiPoly([UniPoly(r) for r in rows])


def _frac_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _uni_str(p: UniPoly) -> str:
    if not p:
        return "0"
    parts = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
        if k == 0:
            term = _frac_str(c)
        elif c == 1:
            term = mono
        elif c == -1:
            term = f"-{mono}"
        else:
            term = f"{_frac_str(c)} {mono}"
        parts.append(term)
    out = " + ".join(parts)
    return out.replace("+ -", "- ")


def serialize(f: BiPoly) -> str:
    """Canonical text form; parse(serialize(f)) == f."""
    parts = []
    for i, c in enumerate(f.coeffs):
        if not c:
            continue
        mono = "" if i == 0 else (" w" if i == 1 else f" w^{i}")
        parts.append(f"({_uni_str(c)}){mono}")
    return " + ".join(parts)


def serialize_doc(f: BiPoly) -> str:
    return json.dumps({"coeffs": [[_frac_str(c) for c in row.coeffs] or ["0"]
                                  for row in f.coeffs]})


# ---------------------------------------------------------------------------
# support and resultant


def support(f: BiPoly):
    """Support of f: {(i, order(a_i))}, omitting zero coefficients."""
    return {(i, c.order) for i, c in enumerate(f.coeffs) if c}


def resultant_w(f: BiPoly) -> UniPoly:
    """Resultant of f and f_w eliminating w, exact over Q.

    Computed symbolically (Sylvester-determinant definition); its zero set
    is the candidate branch-point abscissae of f.
    """
    if f.degree_w < 1:
        raise ValueError("resultant_w needs degree >= 1 in w")
    fs = sympy.Poly(f.to_sympy(), _W, domain=sympy.QQ[_Z])
    gs = sympy.Poly(f.partial_w().to_sympy(), _W, domain=sympy.QQ[_Z])
    res = sympy.resultant(fs, gs)
    if res == 0:
        return UniPoly([])
    rp = sympy.Poly(res, _Z)
    out = [Fraction(0)] * (rp.degree() + 1)
    for (k,), c in rp.terms():
        c = sympy.Rational(c)
        out[k] = Fraction(int(c.p), int(c.q))
    return UniPoly(out)


def square_free(p: UniPoly) -> UniPoly:
    """Square-free part of an exact polynomial (same roots, multiplicity 1).

    Exact gcd with the derivative over Q; the quotient keeps every distinct
    root exactly once, which is all the root finder can resolve anyway.
    """
    if p.degree < 1:
        return p
    ps = sympy.Poly(p.to_sympy(), _Z, domain=sympy.QQ)
    g = sympy.gcd(ps, ps.diff(_Z))
    q = sympy.div(ps, g, _Z)[0]
    out = [Fraction(0)] * (q.degree() + 1)
    for (k,), c in q.terms():
        c = sympy.Rational(c)
        out[k] = Fraction(int(c.p), int(c.q))
    return UniPoly(out)


# ---------------------------------------------------------------------------
# Aberth-Ehrlich simultaneous root finding


def _bini_start(coeffs, n, dps):
    """Initial guesses on perturbed circles scaled from the coefficient
    Newton polygon (upper hull of (i, log|c_i|))."""
    with mpmath.workdps(dps):
        logs = []
        for i, c in enumerate(coeffs):
            m = abs(c)
            logs.append(None if m == 0 else mpmath.log(m))
        # upper convex hull
        hull = []
        for i in range(n + 1):
            if logs[i] is None:
                continue
            while len(hull) >= 2:
                (i1, l1), (i2, l2) = hull[-2], hull[-1]
                if (l2 - l1) * (i - i1) <= (logs[i] - l1) * (i2 - i1):
                    hull.pop()
                else:
                    break
            hull.append((i, logs[i]))
        guesses = []
        k = 0
        two_pi = 2 * mpmath.pi
        for (i1, l1), (i2, l2) in zip(hull, hull[1:]):
            r = mpmath.exp((l1 - l2) / (i2 - i1))
            for j in range(i2 - i1):
                theta = two_pi * (k + 1) / n + mpf("0.4") + mpf("0.08") * (i1 + 1)
                guesses.append(r * mpmath.exp(mpc(0, theta)))
                k += 1
        return guesses


def _horner2(coeffs, x):
    """Evaluate p and p' by a fused Horner pass."""
    p = mpc(0)
    dp = mpc(0)
    for c in reversed(coeffs):
        dp = dp * x + p
        p = p * x + c
    return p, dp


def _aberth_sweeps(coeffs, pts, dps, max_sweeps, tol_exp):
    """Run Aberth sweeps in place; returns (points, last corrections)."""
    n = len(pts)
    with mpmath.workdps(dps):
        corrs = [mpf(1)] * n
        tol = mpf(10) ** tol_exp
        prev_norm = None
        stall = 0
        for _ in range(max_sweeps):
            new = list(pts)
            worst = mpf(0)
            for i in range(n):
                x = pts[i]
                p, dp = _horner2(coeffs, x)
                if p == 0:
                    corrs[i] = mpf(0)
                    continue
                if dp == 0:
                    # nudge off a critical point
                    new[i] = x + (abs(x) + 1) * mpf(10) ** (-dps // 2)
                    continue
                newton = p / dp
                s = mpc(0)
                for j in range(n):
                    if j != i:
                        d = x - pts[j]
                        if d != 0:
                            s += 1 / d
                denom = 1 - newton * s
                corr = newton if denom == 0 else newton / denom
                new[i] = x - corr
                rel = abs(corr) / max(abs(x), mpf(1))
                corrs[i] = rel
                if rel > worst:
                    worst = rel
            pts = new
            if worst < tol:
                break
            # clusters of simple roots converge linearly with a rate close
            # to (m-1)/m before the quadratic phase kicks in; only break
            # when many consecutive sweeps show essentially no progress
            if prev_norm is not None and worst > prev_norm * mpf("0.98"):
                stall += 1
                if stall > 24:
                    break  # cluster stagnation
            else:
                stall = 0
            prev_norm = worst
    return pts, corrs


def _poly_roots_mpc(coeffs, dps):
    """All roots of a dense mpc coefficient list (low->high) at ~dps digits.

    Returns (roots, est_accuracy_digits).  Zero roots from a vanishing
    constant block are returned exactly.
    """
    cs = list(coeffs)
    while cs and cs[-1] == 0:
        cs.pop()
    if len(cs) <= 1:
        return [], []
    ord0 = 0
    while cs[ord0] == 0:
        ord0 += 1
    cs = cs[ord0:]
    n = len(cs) - 1
    roots = [mpc(0)] * ord0
    accs = [dps] * ord0
    if n >= 1:
        work = 40
        with mpmath.workdps(dps + GUARD_DIGITS):
            monic = [c / cs[-1] for c in cs]
        pts = _bini_start(monic, n, work)
        while True:
            pts, corrs = _aberth_sweeps(monic, pts, work + n, 40 + 4 * n,
                                        -(work - 5))
            if work >= dps:
                break
            work = min(dps, work * 2 + 10)
            with mpmath.workdps(work + n + GUARD_DIGITS):
                pts = [mpc(p) for p in pts]
        pts, corrs = _aberth_sweeps(monic, pts, dps + n, 12, -(dps - 3))
        with mpmath.workdps(dps + GUARD_DIGITS):
            for p, c in zip(pts, corrs):
                roots.append(p)
                a = dps if c == 0 else int(-mpmath.log10(c))
                accs.append(max(0, min(dps, a)))
    order = sorted(range(len(roots)), key=lambda i: (roots[i].real, roots[i].imag))
    return [roots[i] for i in order], [accs[i] for i in order]


def roots(p: UniPoly, precision: int):
    """All complex roots of an exact polynomial, ordered by (Re, Im).

    Each root is a SigComplex whose accuracy reflects the final iteration
    correction; residuals are checked in the backward-error sense.
    """
    if p.degree < 1:
        raise ValueError("roots needs degree >= 1")
    with mpmath.workdps(precision + GUARD_DIGITS):
        cs = [_frac_to_mpf(c) for c in p.coeffs]
    rts, accs = _poly_roots_mpc(cs, precision)
    out = [SigComplex(r, a, precision) for r, a in zip(rts, accs)]
    for r in out:
        if not _residual_small(cs, r.value, precision):
            raise PrecisionExhausted(
                "root residual did not vanish at the working accuracy",
                suggest_precision=2 * precision)
    return out


def _residual_small(coeffs, x, precision):
    """Backward-error test: |p(x)| below 10^-acc relative to sum |c_i||x|^i."""
    with mpmath.workdps(precision + GUARD_DIGITS):
        p, _ = _horner2(coeffs, x)
        bound = mpf(0)
        xm = abs(x)
        t = mpf(1)
        for c in coeffs:
            bound += abs(c) * t
            t *= xm
        if bound == 0:
            return p == 0
        return abs(p) <= bound * mpf(10) ** (-(precision // 2))


# ---------------------------------------------------------------------------
# clustering


@dataclass(frozen=True)
class RootCluster:
    """Roots merged under the numerically-zero test at some accuracy."""
    center: SigComplex
    multiplicity: int
    members: tuple = field(default_factory=tuple)


def cluster(roots_in: Sequence[SigComplex], accuracy: int):
    """Partition roots by transitive closure of numerical equality.

    Two roots land in the same cluster iff a chain of pairwise differences
    each numerically zero at ``accuracy`` connects them.
    """
    n = len(roots_in)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            d = roots_in[i] - roots_in[j]
            if is_numerically_zero(d, accuracy):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(roots_in[i])
    out = []
    for members in groups.values():
        dps = min(m.dps for m in members)
        with mpmath.workdps(dps + GUARD_DIGITS):
            c = sum((m.value for m in members), mpc(0)) / len(members)
        acc = min(m.accuracy for m in members)
        out.append(RootCluster(SigComplex(c, acc, dps), len(members), tuple(members)))
    out.sort(key=lambda cl: (cl.center.value.real, cl.center.value.imag))
    return out


# ---------------------------------------------------------------------------
# fibers


@dataclass(frozen=True)
class Fiber:
    """The n roots of w -> f(z0, w) plus their smallest pairwise gap."""
    values: tuple
    p_min: object  # mpf

    def __iter__(self):
        return iter(self.values)


def fiber(f: BiPoly, z0, precision: int) -> Fiber:
    """Solve f(z0, w) = 0 at the requested precision.

    z0 may be a SigComplex or an mpmath number.  Raises
    DegenerateFiberError when z0 sits on a pole (a_n(z0) numerically zero).
    """
    with mpmath.workdps(precision + GUARD_DIGITS):
        z0v = z0.value if isinstance(z0, SigComplex) else mpc(z0)
    cs = f.eval_w_coeffs(z0v, precision)
    scale_ref = max(abs(c) for c in cs)
    if scale_ref == 0 or abs(cs[-1]) < scale_ref * mpf(10) ** (-(precision // 2)):
        raise DegenerateFiberError(f"leading coefficient vanishes at z0={z0v}")
    rts, accs = _poly_roots_mpc(cs, precision)
    for r in rts:
        if not _residual_small(cs, r, precision):
            raise PrecisionExhausted(
                "fiber root residual did not vanish at the working accuracy",
                suggest_precision=2 * precision)
    vals = tuple(SigComplex(r, a, precision) for r, a in zip(rts, accs))
    with mpmath.workdps(precision + GUARD_DIGITS):
        pmin = None
        for i in range(len(rts)):
            for j in range(i + 1, len(rts)):
                d = abs(rts[i] - rts[j])
                if pmin is None or d < pmin:
                    pmin = d
        if pmin is None:
            pmin = mpf(1)
    return Fiber(vals, pmin)
