"""Newton-polygon machinery on numerically-coefficiented polynomials.

The driver walks the classical recursion: take the lower Newton leg of
the support, read a characteristic equation off each segment, split its
nonzero roots into numerically-simple roots (leaves) and multiple-root
clusters (descend and recurse, with zero-slope segments dropped from
level two on).  Leaves carry everything needed to switch to regular
(integer-power) form for the fast series iteration.

Exponent bookkeeping is exact: slopes, intercepts, and all z-exponents
are Fractions throughout; only the coefficients are approximate.
Coefficients whose magnitude falls below the polynomial's accuracy
budget are pruned as residuals and appended to a machine-readable log,
mirroring the accuracy-monitoring discipline used for multiple-root
detection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
from mpmath import mpc, mpf

from . import algebra
from .algebra import BiPoly, UniPoly, _poly_roots_mpc
from .errors import InvariantViolation, PrecisionExhausted
from .numerics import GUARD_DIGITS, SigComplex, scale

#: clustering keeps a safety margin below the estimated root accuracy
_CLUSTER_MARGIN = 6


# ---------------------------------------------------------------------------
# normalization (exact)


def normalize(f: BiPoly):
    """Remove the algebraic pole at the origin: g(z,w) = z^m f(z, w/z^E).

    E is the smallest non-negative integer with all branch exponents of g
    non-negative; every branch of f is z^(-E) times a branch of g.
    Returns (g, E); g == f when a_n(0) != 0.
    """
    n = f.degree_w
    ord_n = f.coeffs[n].order
    if ord_n == 0:
        return f, 0
    # steepest ascent into the rightmost support point fixes the pole order
    smax = Fraction(0)
    for i, c in enumerate(f.coeffs[:-1]):
        if c:
            s = Fraction(ord_n - c.order, n - i)
            if s > smax:
                smax = s
    E = int(math.ceil(smax))
    if E == 0:
        return f, 0
    m = max(i * E - c.order for i, c in enumerate(f.coeffs) if c)
    m = max(0, m)
    out = []
    for i, c in enumerate(f.coeffs):
        if not c:
            out.append(UniPoly([]))
        else:
            k = m - i * E
            if c.order + k < 0:
                raise InvariantViolation("normalization produced a negative exponent")
            if k >= 0:
                out.append(c.shift(k))
            else:
                out.append(UniPoly(c.coeffs[-k:]))
    return BiPoly(out), E


# ---------------------------------------------------------------------------
# numeric bivariate polynomials with fractional z-exponents


def _mpf_to_fraction(x) -> Fraction:
    """The exact rational value of a binary float."""
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return Fraction(0)
    v = Fraction(man) * (Fraction(2) ** exp)
    return -v if sign else v


class NumBiPoly:
    """sum b_{i,e} z^e w^i with mpc coefficients and Fraction exponents.

    ``accuracy`` is the absolute digit budget shared by all coefficients:
    terms below 10^-accuracy are residuals.  ``dps`` is the mpmath working
    precision the coefficients live at.  ``exact`` marks coefficients that
    were converted from rationals without any rounding: multiple roots of
    exact data are true multiple roots, while for inexact data they are
    only resolvable to data_accuracy/multiplicity digits.
    """

    __slots__ = ("terms", "accuracy", "dps", "residual_log", "exact")

    def __init__(self, terms: dict, accuracy: int, dps: int, residual_log=None,
                 exact: bool = False):
        self.terms = terms  # {i: {Fraction e: mpc}}
        self.accuracy = int(accuracy)
        self.dps = int(dps)
        self.residual_log = residual_log if residual_log is not None else []
        self.exact = bool(exact)

    @classmethod
    def from_exact(cls, f: BiPoly, precision: int) -> "NumBiPoly":
        terms = {}
        with mpmath.workdps(precision + GUARD_DIGITS):
            exact = True
            maxmag = mpf(0)
            for i, c in enumerate(f.coeffs):
                if not c:
                    continue
                row = {}
                for k, q in enumerate(c.coeffs):
                    if q != 0:
                        v = mpc(algebra._frac_to_mpf(q))
                        if exact and _mpf_to_fraction(v.real) != q:
                            exact = False
                        row[Fraction(k)] = v
                        maxmag = max(maxmag, abs(v))
                terms[i] = row
        acc = precision - max(0, scale(maxmag))
        return cls(terms, acc, precision, exact=exact)

    @property
    def degree_w(self) -> int:
        return max(i for i, row in self.terms.items() if row)

    def order_w(self) -> int:
        return min(i for i, row in self.terms.items() if row)

    def max_magnitude(self):
        with mpmath.workdps(self.dps):
            m = mpf(0)
            for row in self.terms.values():
                for v in row.values():
                    a = abs(v)
                    if a > m:
                        m = a
            return m

    def prune(self, where: str):
        """Drop residual terms below the accuracy budget; log each one."""
        with mpmath.workdps(self.dps):
            thr = mpf(10) ** (-self.accuracy)
            for i in list(self.terms):
                row = self.terms[i]
                for e in list(row):
                    if abs(row[e]) < thr:
                        self.residual_log.append(
                            {"where": where, "w_power": i, "z_exp": str(e),
                             "magnitude": mpmath.nstr(abs(row[e]), 8)})
                        del row[e]
                if not row:
                    del self.terms[i]
        if not self.terms:
            raise PrecisionExhausted(
                "all coefficients pruned to zero; raise the working precision",
                suggest_precision=2 * self.dps)
        return self


@dataclass(frozen=True)
class SupportPoint:
    """Lowest-order term of one w-power: the pair (i, alpha) with its
    coefficient value."""
    i: int
    e: Fraction
    coeff: object  # mpc


def support_points(p: NumBiPoly) -> list:
    """Min z-order term per w-power; zero rows contribute no point."""
    pts = []
    for i in sorted(p.terms):
        row = p.terms[i]
        if not row:
            continue
        e = min(row)
        pts.append(SupportPoint(i, e, row[e]))
    return pts


# ---------------------------------------------------------------------------
# lower Newton leg


@dataclass(frozen=True)
class Segment:
    """One edge of the lower Newton leg.

    lam is the negative of the edge slope, beta its vertical intercept;
    points lists every support point lying exactly on the edge line
    (endpoints and interior, all feeding the characteristic equation).
    """
    lam: Fraction
    beta: Fraction
    points: tuple


def lower_leg(points: Sequence[SupportPoint], exclude_zero_slope: bool):
    """Segments of the lower-left convex hull, ordered by decreasing lam.

    All remaining support points lie above or to the right of each
    returned edge.  Zero-slope edges are kept only at recursion level one.
    """
    pts = sorted(points, key=lambda p: (p.i, p.e))
    if len(pts) < 2:
        return []
    # monotone-chain lower hull on exact rational points
    hull = []
    for p in pts:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            if (b.e - a.e) * (p.i - a.i) >= (p.e - a.e) * (b.i - a.i):
                hull.pop()
            else:
                break
        hull.append(p)
    segs = []
    for a, b in zip(hull, hull[1:]):
        slope = Fraction(b.e - a.e, b.i - a.i)
        if slope > 0:
            break  # ascending part of the hull is not part of the leg
        if slope == 0 and exclude_zero_slope:
            continue
        lam = -slope
        beta = a.e - slope * a.i
        online = tuple(p for p in pts
                       if a.i <= p.i <= b.i and p.e - slope * p.i == beta)
        segs.append(Segment(lam, beta, online))
    segs.sort(key=lambda s: s.lam, reverse=True)
    return segs


# ---------------------------------------------------------------------------
# characteristic equations


@dataclass(frozen=True)
class CharEq:
    """K(x) = sum of segment coefficients b_{i,alpha} x^i, stored densely."""
    coeffs: tuple  # mpc, low -> high

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def char_eq(segment: Segment) -> CharEq:
    top = max(p.i for p in segment.points)
    out = [mpc(0)] * (top + 1)
    for p in segment.points:
        out[p.i] = p.coeff  # already mpc; re-wrapping would round it
    return CharEq(tuple(out))


def _char_roots(K: CharEq, dps: int, data_accuracy: Optional[int] = None,
                data_exact: bool = False):
    """Nonzero roots of K with accuracy-driven clustering.

    Structural zero roots (the x^{i_1} factor) belong to steeper segments
    and are dropped without comment; returns a list of RootClusters.

    ``data_accuracy`` is the absolute digit budget of the coefficients.
    Each root's accuracy is capped by its first-order conditioning
    10^-data_accuracy / |K'(root)|: a near-multiple root inherited from
    inexact data is then recognized and clustered even though the solver
    resolved the spurious split.
    """
    cs = list(K.coeffs)
    low = 0
    while low < len(cs) and cs[low] == 0:
        low += 1
    cs = cs[low:]
    if len(cs) <= 1:
        return []
    rts, accs = _poly_roots_mpc(cs, dps)
    if data_accuracy is None:
        data_accuracy = dps
    with mpmath.workdps(dps + GUARD_DIGITS):
        capped = []
        for r, a in zip(rts, accs):
            _, dp = algebra._horner2(cs, r)
            powers = sum(max(mpf(1), abs(r)) ** j for j in range(len(cs)))
            if dp == 0:
                capped.append(0)
                continue
            delta = mpf(10) ** (-data_accuracy) * powers / abs(dp)
            cond = int(-mpmath.log10(delta)) if delta > 0 else dps
            capped.append(max(0, min(a, cond)))
    sig = [SigComplex(r, a, dps) for r, a in zip(rts, capped)]
    cl_acc = max(1, min(capped) - _CLUSTER_MARGIN)
    clusters = algebra.cluster(sig, cl_acc)
    out = []
    for cl in clusters:
        if cl.multiplicity > 1:
            out.append(_polish_cluster(cs, cl, dps, data_accuracy,
                                       data_exact))
        else:
            out.append(cl)
    return out


def _polish_cluster(coeffs, cl, dps, data_accuracy, data_exact=False):
    """Refine a multiple-root cluster center by Newton on K^{(m-1)}.

    An m-fold root of K is a simple root of the (m-1)-th derivative, so
    this recovers nearly full precision for exact multiplicities.  For
    inexact data the claimed accuracy is capped at data_accuracy/m: the
    branch structure at an m-fold root is only determined to that
    resolution (coefficient noise 10^-A splits the root by 10^(-A/m)),
    and digits past the limit would let noise-born terms survive pruning
    after the descent substitution.
    """
    m = cl.multiplicity
    with mpmath.workdps(dps + GUARD_DIGITS):
        d = list(coeffs)
        for _ in range(m - 1):
            d = [k * c for k, c in enumerate(d)][1:]
        x = mpc(cl.center.value)
        # the raw center may be off by its full accuracy estimate, not just
        # the member spread, so the guard admits both
        spread = max(abs(r.value - cl.center.value) for r in cl.members)
        worst = min(r.accuracy for r in cl.members)
        radius = 4 * spread + mpf(10) ** (-(worst - 3))
        last = mpf(1)
        for _ in range(60):
            p, dp = algebra._horner2(d, x)
            if dp == 0 or p == 0:
                break
            step = p / dp
            x -= step
            last = abs(step)
            if last < mpf(10) ** (-(dps - 3)):
                break
        if abs(x - cl.center.value) > radius:
            return cl  # polish wandered off; keep the raw center
        acc = dps if last == 0 else max(cl.center.accuracy,
                                        min(dps, int(-mpmath.log10(last))))
        if not data_exact:
            acc = min(acc, max(1, data_accuracy // m))
    return algebra.RootCluster(SigComplex(x, acc, dps), m, cl.members)


# ---------------------------------------------------------------------------
# descent


@dataclass
class PolygonNode:
    """One level of the recursive polygon.

    The root node (level 0) holds the normalized input; each child holds
    the substituted polynomial for one multiple-root cluster.  Leaves are
    recorded separately (see PolygonLeaf).
    """
    level: int
    poly: NumBiPoly
    lam: Optional[Fraction] = None
    beta: Optional[Fraction] = None
    c: Optional[SigComplex] = None
    multiplicity: int = 1
    children: list = field(default_factory=list)
    segments: list = field(default_factory=list)  # dump data


@dataclass(frozen=True)
class PolygonLeaf:
    """A finished path: simple characteristic root r_k plus its history."""
    lams: tuple          # lambda_1..lambda_k (Fractions)
    prefix: tuple        # ((e_i, c_i) for i < k)
    poly: NumBiPoly      # f_k, the level the simple root was found at
    segment: Segment
    rk: SigComplex

    @property
    def d(self) -> int:
        out = 1
        for lam in self.lams:
            out = out * lam.denominator // math.gcd(out, lam.denominator)
        return out

    @property
    def tail_shift(self) -> Fraction:
        return sum(self.lams, Fraction(0))


def descend(poly: NumBiPoly, segment: Segment, c: SigComplex) -> NumBiPoly:
    """f_{k+1}(z,w) = z^(-beta) f_k(z, z^lam (c + w)).

    Precondition (checked by the driver): c is a multiple characteristic
    root of the segment.  Residual terms created by cancellation against
    c are pruned and logged.
    """
    lam, beta = segment.lam, segment.beta
    n = poly.degree_w
    with mpmath.workdps(poly.dps + GUARD_DIGITS):
        cv = mpc(c.value)
        cpow = [mpc(1)]
        for _ in range(n):
            cpow.append(cpow[-1] * cv)
        binom = [[math.comb(i, k) for k in range(i + 1)] for i in range(n + 1)]
        out: dict = {}
        for i, row in poly.terms.items():
            for e, b in row.items():
                enew_base = e + lam * i - beta
                for k in range(i + 1):
                    v = b * binom[i][k] * cpow[i - k]
                    dest = out.setdefault(k, {})
                    cur = dest.get(enew_base)
                    dest[enew_base] = v if cur is None else cur + v
        growth = max(mpf(1), abs(cv)) ** n * mpf(2) ** n
    loss = max(0, scale(growth))
    acc = min(poly.accuracy, c.accuracy) - loss
    if acc <= 0:
        raise PrecisionExhausted(
            "accuracy exhausted during polygon descent",
            suggest_precision=2 * poly.dps)
    child = NumBiPoly(out, acc, poly.dps, poly.residual_log)
    return child.prune(f"descend lam={lam}")


def polygon_tree(g: NumBiPoly):
    """Run the full recursion; returns (root PolygonNode, list of leaves)."""
    if 0 not in g.terms or not g.terms.get(0):
        raise InvariantViolation("a_0 vanishes identically: w divides the input")
    root = PolygonNode(level=0, poly=g)
    leaves: list = []
    _expand(root, (), (), leaves)
    expected = g.degree_w - g.order_w()
    if len(leaves) != expected:
        raise InvariantViolation(
            f"polygon produced {len(leaves)} series for degree {expected}")
    return root, leaves


def _expand(node: PolygonNode, lams: tuple, prefix: tuple, leaves: list):
    poly = node.poly
    level = node.level + 1
    segs = lower_leg(support_points(poly), exclude_zero_slope=level >= 2)
    node.segments = segs
    e_base = sum(lams, Fraction(0))
    for seg in segs:
        K = char_eq(seg)
        for cl in _char_roots(K, poly.dps, poly.accuracy, poly.exact):
            if level >= 2 and abs(cl.center.value) < mpf(10) ** (-max(1, poly.accuracy)):
                # c_i = 0 is outside the representation (see module notes);
                # record and skip rather than emit a bogus series
                poly.residual_log.append(
                    {"where": f"char-root level {level}", "w_power": None,
                     "z_exp": str(seg.lam), "magnitude": "numerically zero root"})
                raise InvariantViolation(
                    "characteristic root vanished after pruning; input may "
                    "need higher precision")
            if cl.multiplicity == 1:
                leaves.append(PolygonLeaf(
                    lams=lams + (seg.lam,), prefix=prefix, poly=poly,
                    segment=seg, rk=cl.center))
            else:
                child_poly = descend(poly, seg, cl.center)
                child = PolygonNode(level=level, poly=child_poly, lam=seg.lam,
                                    beta=seg.beta, c=cl.center,
                                    multiplicity=cl.multiplicity)
                node.children.append(child)
                _expand(child, lams + (seg.lam,),
                        prefix + ((e_base + seg.lam, cl.center),), leaves)


# ---------------------------------------------------------------------------
# regular form


@dataclass(frozen=True)
class RegularPoly:
    """Integer-power image fbar(z,w) = ztilde^{-beta} f_k(z, z^lam w) at
    z -> z^d, as dense z-coefficient rows per w-power."""
    rows: tuple     # rows[i] = tuple of mpc, z^0..z^deg
    d: int
    rk: SigComplex
    accuracy: int
    dps: int

    @property
    def degree_w(self):
        return len(self.rows) - 1


def regular_form(leaf: PolygonLeaf) -> RegularPoly:
    """Clear fractional exponents along the leaf's path.

    d is the LCM of the slope denominators; the substitution scales w by
    z^lam_k, divides by z^beta_k and maps z -> z^d, after which fbar(0, r_k)
    is numerically zero and Newton iteration applies.
    """
    poly = leaf.poly
    lam, beta = leaf.segment.lam, leaf.segment.beta
    d = leaf.d
    rows: dict = {}
    zdeg = 0
    for i, row in poly.terms.items():
        for e, b in row.items():
            m = (e + lam * i - beta) * d
            if m.denominator != 1 or m < 0:
                raise InvariantViolation(
                    f"regular form produced exponent {m} (d={d})")
            rows.setdefault(i, {})[int(m)] = b
            zdeg = max(zdeg, int(m))
    n = max(rows)
    with mpmath.workdps(poly.dps + GUARD_DIGITS):
        dense = tuple(
            tuple(rows.get(i, {}).get(k, mpc(0)) for k in range(zdeg + 1))
            for i in range(n + 1))
    return RegularPoly(dense, d, leaf.rk, poly.accuracy, poly.dps)
