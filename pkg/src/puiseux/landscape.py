"""Singular-point inventory: where branch analyticity can break.

Singular points are the zeros of the resultant of f and f_w together
with the zeros of the leading coefficient a_n (poles).  They are grouped
into *rings* by increasing modulus; the radius of convergence of every
branch is the modulus of some ring (or infinity).  The origin is never a
ring: a singular origin is reported separately since expansions are
taken there.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import mpmath
from mpmath import mpf

from . import algebra
from .algebra import BiPoly, UniPoly
from .errors import AmbiguousMatchError, ToleranceError
from .numerics import GUARD_DIGITS, SigComplex

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SingularPoint:
    location: SigComplex
    is_pole: bool          # a_n vanishes here (may also kill the resultant)

    def modulus(self):
        return self.location.magnitude()


@dataclass(frozen=True)
class SingularRing:
    index: int             # 1-based, ascending modulus
    modulus: object        # mpf
    points: tuple


@dataclass(frozen=True)
class Landscape:
    rings: tuple
    origin_singular: bool

    @property
    def points(self):
        return [p for r in self.rings for p in r.points]


def singular_points(f: BiPoly, precision: int):
    """All nonzero singular points plus whether the origin is singular.

    Pole locations and resultant zeros that coincide are merged, keeping
    the pole flag.
    """
    res = algebra.resultant_w(f)
    origin = res.order > 0
    pts = []
    # the resultant may vanish to higher order at a singular point (e.g.
    # two sheets sharing a value); reduce to the square-free part so each
    # point appears once and every root is simple for the solver
    stripped = algebra.square_free(UniPoly(res.coeffs[res.order:]))
    if stripped.degree >= 1:
        found = algebra.roots(stripped, precision)
        acc = max(1, min(r.accuracy for r in found) - 6)
        pts.extend(SingularPoint(c.center, False)
                   for c in algebra.cluster(found, acc))
    an = f.coeffs[f.degree_w]
    if an.order > 0:
        origin = True
    lead = algebra.square_free(UniPoly(an.coeffs[an.order:]))
    if lead.degree >= 1:
        merged = list(pts)
        with mpmath.workdps(precision + GUARD_DIGITS):
            for p in algebra.roots(lead, precision):
                tol = mpf(10) ** (-min(p.accuracy, precision) // 2)
                hit = None
                for i, q in enumerate(merged):
                    if abs(q.location.value - p.value) < tol:
                        hit = i
                        break
                if hit is None:
                    merged.append(SingularPoint(p, True))
                else:
                    merged[hit] = SingularPoint(merged[hit].location, True)
        pts = merged
    pts.sort(key=lambda p: (p.modulus(), p.location.value.real,
                            p.location.value.imag))
    return pts, origin


def rings(points, precision: int) -> tuple:
    """Group points whose moduli agree to half the working accuracy."""
    out = []
    current = []
    cur_mod = None
    with mpmath.workdps(precision + GUARD_DIGITS):
        thr = mpf(10) ** (-(precision // 2))
        for p in points:
            m = abs(p.location.value)
            if cur_mod is not None and abs(m - cur_mod) < thr * max(1, cur_mod):
                current.append(p)
            else:
                if current:
                    out.append(current)
                current = [p]
                cur_mod = m
        if current:
            out.append(current)
    return tuple(SingularRing(i + 1, grp[0].modulus(), tuple(grp))
                 for i, grp in enumerate(out))


def landscape(f: BiPoly, precision: int) -> Landscape:
    pts, origin = singular_points(f, precision)
    return Landscape(rings(pts, precision), origin)


def base_point(scape: Landscape, precision: int):
    """Real positive reference point z_m inside the first ring.

    With no finite singular points every branch is entire near the
    origin; a default of 1/2 is used and logged.
    """
    if not scape.rings:
        log.info("no nonzero singular points: using default base point 1/2")
        with mpmath.workdps(precision):
            return mpf(1) / 2
    with mpmath.workdps(precision + GUARD_DIGITS):
        return scape.rings[0].modulus / 2


def match(values, fiber, divisor: int = 100, errors=None):
    """Injectively assign each value to its nearest fiber root.

    Raises ToleranceError when a value is farther than p_min/divisor from
    every root and AmbiguousMatchError when two values claim one root.
    ``errors`` optionally widens the tolerance per value (truncated-series
    evaluations carry their own error bound, which can exceed the fiber
    gap when the branch is evaluated deep into its convergence disk).
    """
    assignment = []
    taken = {}
    with mpmath.workdps(fiber.values[0].dps + GUARD_DIGITS):
        base = fiber.p_min / divisor
        for k, v in enumerate(values):
            if errors is not None and not mpmath.isfinite(errors[k]):
                raise ToleranceError(
                    f"value {k} was evaluated outside its disk of "
                    "convergence (term magnitudes not decaying); increase "
                    "the number of series terms or the working precision",
                    suggest_terms=True)
            tol = base if errors is None else max(base, 100 * errors[k])
            vv = v.value if isinstance(v, SigComplex) else v
            best, dist = None, None
            for i, root in enumerate(fiber.values):
                d = abs(vv - root.value)
                if dist is None or d < dist:
                    best, dist = i, d
            if dist >= tol:
                raise ToleranceError(
                    f"value {k} misses every sheet by {mpmath.nstr(dist, 5)} "
                    f"(tolerance {mpmath.nstr(tol, 5)}); increase the number "
                    "of series terms or the working precision",
                    suggest_terms=True)
            if best in taken:
                raise AmbiguousMatchError(
                    f"values {taken[best]} and {k} both match sheet {best}")
            taken[best] = k
            assignment.append(best)
    return assignment


def sort_branches(branches, f: BiPoly, z_m, precision: int,
                  divisor: int = 100):
    """Label branches the way tables are reported.

    Every sheet of every branch is evaluated at the real point z_m and
    matched against the fiber there (a consistency check in itself).
    Branches are keyed by their smallest sheet value in (Re, Im) order;
    a branch with a unique cycle d is labeled w_d, otherwise w_{d,i} with
    i counting same-cycle branches in key order.
    """
    fib = algebra.fiber(f, z_m, precision)
    keyed = []
    with mpmath.workdps(precision + GUARD_DIGITS):
        for b in branches:
            vals = [b.eval(z_m, j) for j in b.sheets()]
            est = b.truncation_estimate(abs(z_m))
            match(vals, fib, divisor, errors=[est] * len(vals))
            key = min((v.real, v.imag) for v in vals)
            keyed.append((key, b))
    keyed.sort(key=lambda t: t[0])
    by_cycle = {}
    for _, b in keyed:
        by_cycle.setdefault(b.d, []).append(b)
    out = []
    for _, b in keyed:
        group = by_cycle[b.d]
        if len(group) == 1:
            label = f"w_{b.d}"
        else:
            label = f"w_{{{b.d},{group.index(b) + 1}}}"
        out.append(replace(b, label=label))
    return out
