"""Radius of convergence by analytic continuation across singular rings.

For each branch expanded at the origin, the radius of convergence is the
modulus of the first singular point whose local singular structure
(ramified coverings or poles) the branch's sheets run into.  Rings of
singular points are processed in order of increasing modulus; at each
point the sheets are carried from a safe base point z_s to a probe point
z_e just inside the singularity by integrating dw/dz = -f_z/f_w, and the
arrived values are compared against the sheets of the singular local
branches at that point.  A hit pins the branch's ring of convergence;
survivors advance to the next ring.

Functions with a pole at the origin are handled by running the whole
analysis on the normalized (pole-free) function, whose branches are
z^E w(z): this rescaling changes no ramification and no nonzero poles,
so the rings of convergence carry over verbatim.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import mpmath
from mpmath import mpc, mpf

from . import algebra, landscape as L, polygon, series as S
from .algebra import BiPoly
from .errors import (
    AmbiguousMatchError,
    IntegrationError,
    SheetJumpError,
    ToleranceError,
)
from .numerics import GUARD_DIGITS, SigComplex, scale

log = logging.getLogger(__name__)

DEFAULT_ODE_PRECISION = 40
DEFAULT_ODE_ACCURACY = 30


# ---------------------------------------------------------------------------
# numerical integration


def integrate_sheets(f: BiPoly, z_s, w_values, z_e, ode_precision: int,
                     ode_accuracy: int, labels=None):
    """Carry sheet values from z_s to z_e along the straight segment.

    Solves dw/dt = -(f_z/f_w)(z_e - z_s) for t in [0, 1] for all sheets
    at once with mpmath's arbitrary-order Taylor integrator against a
    goal of 10^-ode_accuracy.  The Taylor steps adapt to the analyticity
    radius along the path, which keeps near-misses of foreign singular
    points affordable; a vanishing f_w (a singular point on the path
    itself) raises IntegrationError naming the offending branch.
    """
    if labels is None:
        labels = [""] * len(w_values)
    with mpmath.workdps(ode_precision + GUARD_DIGITS):
        dz = mpc(z_e) - mpc(z_s)
        z0 = mpc(z_s)
        fw_rows = _numeric_rows(f.partial_w())
        fz_rows = _numeric_rows(f.partial_z())

        def _eval(rows, z, w):
            acc = mpc(0)
            for row in reversed(rows):
                v = mpc(0)
                for c in reversed(row):
                    v = v * z + c
                acc = acc * w + v
            return acc

        def deriv(t, ws):
            z = z0 + t * dz
            out = []
            for w, label in zip(ws, labels):
                fw = _eval(fw_rows, z, w)
                if fw == 0:
                    raise IntegrationError(
                        "f_w vanished on the integration path", branch=label)
                out.append(-_eval(fz_rows, z, w) / fw * dz)
            return out

        try:
            sol = mpmath.odefun(deriv, 0, [mpc(w) for w in w_values],
                                tol=mpf(10) ** (-ode_accuracy))
            return list(sol(1))
        except ZeroDivisionError as exc:
            raise IntegrationError(
                "division by zero during continuation",
                branch=labels[0]) from exc


def integrate_sheet(f: BiPoly, z_s, w_s, z_e, ode_precision: int,
                    ode_accuracy: int, label: str = ""):
    """Single-sheet convenience wrapper around integrate_sheets."""
    return integrate_sheets(f, z_s, [w_s], z_e, ode_precision,
                            ode_accuracy, [label])[0]


def _numeric_rows(f: BiPoly):
    """BiPoly coefficients as nested mpf lists at the current precision."""
    return [[algebra._frac_to_mpf(q) for q in a.coeffs] for a in f.coeffs]


# ---------------------------------------------------------------------------
# local expansions at a numeric singular point


def _shift_poly(f: BiPoly, s: SigComplex, precision: int) -> polygon.NumBiPoly:
    """f(z + s, w) as a numeric bivariate polynomial."""
    terms = {}
    with mpmath.workdps(precision + GUARD_DIGITS):
        sv = mpc(s.value)
        maxmag = mpf(0)
        for i, a in enumerate(f.coeffs):
            if not a:
                continue
            # repeated synthetic division by (z - s) peels off the Taylor
            # coefficients of a(z + s), lowest first
            work = [algebra._frac_to_mpf(q) + mpc(0) for q in a.coeffs]
            out = []
            while work:
                quot = [mpc(0)] * (len(work) - 1)
                r = work[-1]
                for j in range(len(work) - 2, -1, -1):
                    quot[j] = r
                    r = r * sv + work[j]
                out.append(r)
                work = quot
            row = {}
            for kk, v in enumerate(out):
                if v != 0:
                    row[Fraction(kk)] = v
                    maxmag = max(maxmag, abs(v))
            if row:
                terms[i] = row
    acc = min(precision, s.accuracy) - max(0, scale(maxmag))
    p = polygon.NumBiPoly(terms, acc, precision)
    return p.prune("local shift")


def _normalize_numeric(p: polygon.NumBiPoly):
    """Numeric version of pole removal: returns (g, E_local)."""
    import math as _math
    n = p.degree_w
    ords = {i: min(row) for i, row in p.terms.items() if row}
    ord_n = ords[n]
    if ord_n == 0:
        return p, 0
    smax = Fraction(0)
    for i, e in ords.items():
        if i < n:
            s = Fraction(ord_n - e, n - i)
            if s > smax:
                smax = s
    E = int(_math.ceil(smax))
    if E <= 0:
        return p, 0
    m = max(0, max(i * E - ords[i] for i in ords))
    out = {i: {e + m - i * E: v for e, v in row.items()}
           for i, row in p.terms.items()}
    return polygon.NumBiPoly(out, p.accuracy, p.dps, p.residual_log), E


def local_basis(f: BiPoly, s: SigComplex, precision: int, terms: int):
    """All branches of f at the point s, as series in (z - s).

    Returns PuiseuxSeries whose E field is the local pole order, so
    evaluation at zeta = z - s gives f-sheet values directly.
    """
    shifted = _shift_poly(f, s, precision)
    g, E = _normalize_numeric(shifted)
    _, leaves = polygon.polygon_tree(g)
    out = []
    for members in S.orbits(leaves):
        rep = members[0]
        reg = polygon.regular_form(rep)
        tail, acc = S.iterate(reg, terms)
        out.append(S.PuiseuxSeries(
            E=E, d=rep.d, prefix=tuple((e, c.value) for e, c in rep.prefix),
            tail_shift=rep.tail_shift, tail=tuple(tail),
            accuracy=acc, dps=precision))
    return out


def is_singular_branch(b: S.PuiseuxSeries) -> bool:
    """Ramified coverings and local poles block continuation."""
    return b.d >= 2 or (b.exponents() and b.exponents()[0] < 0)


# ---------------------------------------------------------------------------
# continuation driver


@dataclass(frozen=True)
class PointReport:
    """What happened at one singular point of one ring."""
    ring_index: int
    point: object = None      # the SingularPoint processed
    z_s: object = None
    z_e: object = None
    continuable: tuple = ()
    impinged: tuple = ()
    integration: tuple = ()   # per-sheet diagnostic rows


@dataclass(frozen=True)
class BranchRadius:
    label: str
    cycle: int
    ring_index: Optional[int]     # None: no ring stopped it in range
    modulus: object = None        # mpf when ring_index is set


@dataclass
class ContinuationReport:
    branches: list
    points: list = field(default_factory=list)
    rings_processed: int = 0


def _snap(values, fib, divisor, errors=None):
    idx = L.match(values, fib, divisor, errors=errors)
    return idx, [fib.values[i].value for i in idx]


def radii(f, precision: int, terms: int, divisor: int = 100,
          max_ring: Optional[int] = None,
          ode_precision: int = DEFAULT_ODE_PRECISION,
          ode_accuracy: int = DEFAULT_ODE_ACCURACY,
          local_terms: Optional[int] = None) -> ContinuationReport:
    """Ring of convergence for every branch of f(z, w) = 0 at the origin.

    ``terms`` controls the origin expansion, ``local_terms`` (default:
    max(terms, 32)) the expansions at singular points.  Branches still
    alive after ``max_ring`` rings are reported with ring_index None.
    """
    if isinstance(f, str):
        f = algebra.parse(f)
    if local_terms is None:
        local_terms = max(terms, 32)
    g, E = polygon.normalize(f)
    scape = L.landscape(g, precision)
    z_m = L.base_point(scape, precision)
    branches = S.expand(f, precision, terms)
    branches = L.sort_branches(branches, f, z_m, precision, divisor)
    # all continuation work happens on the pole-free normalized function;
    # its sheets are z^E times the sheets of f
    work = [replace(b, E=0) for b in branches]

    report = ContinuationReport(branches=[])
    alive = list(work)
    resolved = {}
    if not scape.rings:
        report.branches = [BranchRadius(b.label, b.d, None) for b in branches]
        return report

    with mpmath.workdps(precision + GUARD_DIGITS):
        r1 = scape.rings[0].modulus
        limit = len(scape.rings) if max_ring is None else \
            min(max_ring, len(scape.rings))
        for ring in scape.rings[:limit]:
            if not alive:
                break
            dead_this_ring = set()
            for pt in ring.points:
                survivors, rows, z_s, z_e = _continue_point(
                    g, scape, pt, r1, alive, precision, divisor,
                    ode_precision, ode_accuracy, local_terms)
                impinged = tuple(b.label for b in alive
                                 if b.label not in survivors)
                dead_this_ring.update(impinged)
                report.points.append(PointReport(
                    ring_index=ring.index, point=pt, z_s=z_s, z_e=z_e,
                    continuable=tuple(sorted(survivors)), impinged=impinged,
                    integration=tuple(rows)))
            for b in alive:
                if b.label in dead_this_ring:
                    resolved[b.label] = (ring.index, ring.modulus)
            alive = [b for b in alive if b.label not in dead_this_ring]
            report.rings_processed = ring.index
    for b in branches:
        if b.label in resolved:
            idx, mod = resolved[b.label]
            report.branches.append(BranchRadius(b.label, b.d, idx, mod))
        else:
            report.branches.append(BranchRadius(b.label, b.d, None))
    return report


def _continue_point(g, scape, pt, r1, alive, precision, divisor,
                    ode_precision, ode_accuracy, local_terms):
    """Process one singular point; returns (surviving labels, diagnostics,
    z_s, z_e)."""
    s = pt.location
    sv = s.value
    mod = abs(sv)
    z_s = (r1 / 2) * sv / mod
    nn = _nearest_gap(scape, pt)
    offset = min(nn / 2, mod - abs(z_s))
    z_e = sv * (1 - offset / mod)

    fib_s = algebra.fiber(g, z_s, precision)
    sheet_vals, owners, errs = [], [], []
    for b in alive:
        est = b.truncation_estimate(abs(z_s))
        for j in b.sheets():
            sheet_vals.append(b.eval(z_s, j))
            owners.append(b.label)
            errs.append(est)
    _, exact_s = _snap(sheet_vals, fib_s, divisor, errors=errs)

    carried = integrate_sheets(g, z_s, exact_s, z_e, ode_precision,
                               ode_accuracy, labels=owners)

    fib_e = algebra.fiber(g, z_e, precision)
    try:
        arrived_idx, arrived = _snap(carried, fib_e, divisor)
    except AmbiguousMatchError as exc:
        raise SheetJumpError(
            f"two continued sheets landed on one value at z_e={z_e}: {exc}"
        ) from exc

    local = local_basis(g, s, precision, local_terms)
    zeta_e = z_e - sv
    singular_idx = set()
    for b in local:
        if not is_singular_branch(b):
            continue
        vals = [b.eval(zeta_e, j) for j in b.sheets()]
        est = b.truncation_estimate(abs(zeta_e))
        idx = L.match(vals, fib_e, divisor, errors=[est] * len(vals))
        singular_idx.update(idx)

    rows = []
    hit_labels = set()
    for owner, ws, wc, idx in zip(owners, exact_s, carried, arrived_idx):
        hit = idx in singular_idx
        if hit:
            hit_labels.add(owner)
        rows.append({
            "branch": owner, "z_s": z_s, "w_s": ws, "z_e": z_e,
            "w_integrated": wc, "w_exact": fib_e.values[idx].value,
            "difference": abs(wc - fib_e.values[idx].value),
            "impinges": hit,
        })
    survivors = {b.label for b in alive} - hit_labels
    return survivors, rows, z_s, z_e


def _nearest_gap(scape, pt):
    """Distance from pt to the nearest other singular point (the origin
    included when it is singular)."""
    sv = pt.location.value
    best = abs(sv) if scape.origin_singular else None
    for q in scape.points:
        if q is pt:
            continue
        d = abs(q.location.value - sv)
        if d == 0:
            continue
        if best is None or d < best:
            best = d
    return best if best is not None else abs(sv)


# ---------------------------------------------------------------------------
# empirical checks


def random_point_check(branch: S.PuiseuxSeries, f: BiPoly, r_mod,
                       precision: int, count: int = 100, seed: int = 0):
    """Maximum sheet error at random points inside the convergence disk.

    Points are drawn with |z| uniform in (|r_c|/100, 99|r_c|/100) from a
    seeded generator, and each sheet value is compared to the nearest
    root of the fiber there.
    """
    rng = random.Random(seed)
    worst = mpf(0)
    with mpmath.workdps(precision + GUARD_DIGITS):
        for _ in range(count):
            u, v = rng.random(), rng.random()
            r = mpf(r_mod) * (mpf(1) / 100 + mpf(98) / 100 * mpf(u))
            z = r * mpmath.expjpi(2 * mpf(v))
            fib = algebra.fiber(f, z, precision)
            for j in branch.sheets():
                w = branch.eval(z, j)
                err = min(abs(w - root.value) for root in fib.values)
                if err > worst:
                    worst = err
    return worst


def straddle_points(scape, ring_index: int, precision: int):
    """Test radii just inside and just outside a ring of convergence.

    z_c sits at the geometric mean with the inner neighboring ring
    (capped at 80% of the ring); z_d a fixed 25% outside, far enough
    that divergence shows up in desk-scale term counts even when the
    next ring is only a fraction of a percent away.
    """
    with mpmath.workdps(precision + GUARD_DIGITS):
        r = scape.rings[ring_index - 1].modulus
        inner = scape.rings[ring_index - 2].modulus if ring_index >= 2 \
            else r / 100
        z_c = min(mpmath.sqrt(inner * r), mpf("0.8") * r)
        z_d = mpf("1.25") * r
        return z_c, z_d
