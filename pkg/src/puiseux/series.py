"""Fractional power series: fast iteration, conjugate sheets, evaluation.

A branch of cycle d is stored once as its *basis* sheet

    w(z) = z^-E ( sum_i c_i z^(e_i)  +  z^(e_k) p(z^(1/d)) )

with exact Fraction exponents, the finite prefix coming off the polygon
path, and a dense tail p computed by quadratically-convergent Newton
iteration on the regular form.  The d conjugate sheets replace z^(1/d)
by its unit-root multiples; evaluation twists each coefficient rather
than re-storing d series.

z^(1/d) always means the principal root exp(log(z)/d) with the argument
of z taken in (-pi, pi].
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
from mpmath import mpc, mpf

from . import numerics
from .errors import (
    AmbiguousMatchError,
    InvariantViolation,
    NotSimpleRootError,
    PrecisionExhausted,
)
from .numerics import GUARD_DIGITS, SigComplex, scale
from .polygon import PolygonLeaf, RegularPoly

# ---------------------------------------------------------------------------
# truncated dense series arithmetic (lists of mpc, low -> high)


def _mul(a, b, N):
    out = [mpc(0)] * min(N, len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if i >= N:
            break
        if ai == 0:
            continue
        top = min(len(b), N - i)
        for j in range(top):
            out[i + j] += ai * b[j]
    return out


def _add(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else mpc(0)) + (b[i] if i < len(b) else mpc(0))
            for i in range(n)]


def _div(a, b, N):
    """a / b mod z^N; requires b[0] != 0."""
    out = []
    inv0 = 1 / b[0]
    for k in range(N):
        s = a[k] if k < len(a) else mpc(0)
        for j in range(1, min(k, len(b) - 1) + 1):
            s -= b[j] * out[k - j]
        out.append(s * inv0)
    return out


def _eval_rows(rows, p, N):
    """sum rows[i](z) p(z)^i mod z^N by a Horner pass in w."""
    acc = [c for c in rows[-1][:N]]
    for i in range(len(rows) - 2, -1, -1):
        acc = _add(_mul(acc, p, N), list(rows[i][:N]))
    return acc


# ---------------------------------------------------------------------------
# Newton iteration on the regular form


def iterate(reg: RegularPoly, terms: int):
    """Tail coefficients p[0..terms-1] with p(0) = r_k.

    Doubles the correct truncation order each sweep, so ceil(log2(terms))
    sweeps suffice; raises NotSimpleRootError when the root is not simple
    in the regular form and PrecisionExhausted when the accuracy budget
    runs out.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    drows = [tuple((i + 1) * c for c in reg.rows[i + 1])
             for i in range(len(reg.rows) - 1)]
    with mpmath.workdps(reg.dps + GUARD_DIGITS):
        rk = mpc(reg.rk.value)
        b0 = mpc(0)
        for i, row in enumerate(drows):
            b0 += row[0] * rk ** i
        if abs(b0) < mpf(10) ** (-max(1, reg.accuracy)):
            raise NotSimpleRootError(
                "the characteristic root is not simple in regular form")
        p = [rk]
        N = 1
        sweeps = 0
        while N < terms:
            N = min(2 * N, terms)
            num = _eval_rows(reg.rows, p, N)
            den = _eval_rows(drows, p, N)
            corr = _div(num, den, N)
            p = _add(p, [-c for c in corr])
            p = p[:N] + [mpc(0)] * (N - len(p))
            sweeps += 1
        # tail coefficients may be huge when the disk of convergence is
        # small; they stay correct relative to their own size, so the
        # budget is charged only for input magnitudes, the conditioning
        # of the w-derivative, and the sweep count
        inmag = max(abs(c) for row in reg.rows for c in row)
        acc = min(reg.accuracy, reg.rk.accuracy) - max(0, scale(inmag)) \
            - max(0, -scale(b0) + 1) - 2 * sweeps
    if acc <= 0:
        raise PrecisionExhausted(
            "series accuracy exhausted during iteration",
            suggest_precision=2 * reg.dps, suggest_terms=terms)
    return p, acc


def residual_order(reg: RegularPoly, tail, tol_digits: Optional[int] = None):
    """Order in z of fbar(z, p(z)): index of the first non-residual
    coefficient, or len(tail) when the whole window vanishes.

    A correctly iterated tail of length T gives residual order >= T.
    Each coefficient is judged in the backward-error sense, against the
    all-positive evaluation at the same index: tail coefficients grow
    like r_c^-k when the disk is small, and the residual's legitimate
    rounding noise grows with them.
    """
    N = len(tail)
    with mpmath.workdps(reg.dps + GUARD_DIGITS):
        r = _eval_rows(reg.rows, list(tail), N)
        arows = [tuple(abs(c) for c in row) for row in reg.rows]
        scale = _eval_rows(arows, [abs(c) for c in tail], N)
        ref = max(mpf(1), max(abs(c) for row in reg.rows for c in row))
        # the doubling iteration loses digits per coefficient index; the
        # default tolerance sits above that slow rounding accumulation
        # while staying far below structural errors, which are O(1) in
        # the backward sense
        tol = tol_digits if tol_digits is not None else max(1, reg.accuracy // 8)
        eps = mpf(10) ** (-tol)
        for k, c in enumerate(r):
            if abs(c) > max(ref, abs(scale[k])) * eps:
                return k
    return N


# ---------------------------------------------------------------------------
# assembled branches


@dataclass(frozen=True)
class PuiseuxSeries:
    """One branch: basis sheet data plus enough to produce all d sheets.

    Exponents of z in the assembled sheet are (e - E) for prefix entries
    and (tail_shift + n/d - E) for tail entries.
    """
    E: int
    d: int
    prefix: tuple          # ((Fraction e, mpc c), ...)
    tail_shift: Fraction
    tail: tuple            # mpc coefficients of p(z^(1/d))
    accuracy: int
    dps: int
    label: str = ""

    @property
    def term_count(self) -> int:
        return len(self.prefix) + len(self.tail)

    def exponents(self):
        """All z-exponents of the assembled sheet, ascending."""
        out = [e - self.E for e, _ in self.prefix]
        out += [self.tail_shift + Fraction(n, self.d) - self.E
                for n in range(len(self.tail))]
        return out

    def _twist(self, j: int):
        """Per-term coefficient multipliers for sheet j."""
        with mpmath.workdps(self.dps + GUARD_DIGITS):
            om = mpmath.expjpi(mpf(2 * (j % self.d)) / self.d) if self.d > 1 \
                else mpc(1)
            for e, c in self.prefix:
                q = e * self.d
                assert q.denominator == 1
                yield e - self.E, c * om ** int(q)
            base = self.tail_shift * self.d
            assert base.denominator == 1
            for n, c in enumerate(self.tail):
                q = int(base) + n
                yield self.tail_shift + Fraction(n, self.d) - self.E, c * om ** q

    def terms_for_sheet(self, j: int):
        """(exponent, coefficient) pairs of sheet j, ascending exponents."""
        return list(self._twist(j))

    def eval(self, z, j: int = 0, terms: Optional[int] = None):
        """Value of sheet j at z, using at most ``terms`` leading terms."""
        zv = z.value if isinstance(z, SigComplex) else mpc(z)
        with mpmath.workdps(self.dps + GUARD_DIGITS):
            zv = mpc(zv)
            if zv == 0:
                raise ZeroDivisionError("series evaluation needs z != 0")
            lg = mpmath.log(zv)
            total = mpc(0)
            for k, (q, c) in enumerate(self._twist(j)):
                if terms is not None and k >= terms:
                    break
                total += c * mpmath.exp(lg * (mpf(q.numerator) / q.denominator))
            return total

    def term_magnitudes(self, r, j: int = 0, terms: Optional[int] = None):
        """|c_q| r^q per term at radius r > 0; the raw convergence profile."""
        with mpmath.workdps(self.dps + GUARD_DIGITS):
            rv = mpf(r)
            out = []
            for k, (q, c) in enumerate(self._twist(j)):
                if terms is not None and k >= terms:
                    break
                out.append(abs(c) * rv ** (mpf(q.numerator) / q.denominator))
            return out

    def truncation_estimate(self, r):
        """Estimated magnitude of the dropped tail when evaluating at |z|=r.

        Geometric extrapolation of the final stored terms; when they are
        not decaying the evaluation radius is outside the empirical disk
        of convergence and the bound is infinite (matching against such
        a value must fail rather than widen its tolerance).
        Sheet-independent: conjugate twisting preserves magnitudes.
        """
        mags = [m for m in self.term_magnitudes(r) if m > 0]
        with mpmath.workdps(self.dps + GUARD_DIGITS):
            if not mags:
                return mpf(0)
            if len(mags) < 6:
                return mags[-1]
            # window maxima are robust to the parity oscillation of
            # conjugate-exponent terms
            last = max(mags[-3:])
            prev = max(mags[-6:-3])
            if prev > 0 and last < prev:
                ratio = (last / prev) ** (mpf(1) / 3)
                return last * ratio / (1 - ratio)
            if last >= max(mags[:len(mags) // 2]):
                # the tail dominates the whole profile: |z| is outside
                # the empirical disk of convergence
                return mpmath.inf
            # flat tail below the peak: noise floor or slow oscillation
            return last

    def sheets(self):
        return range(self.d)


def classify_profile(mags) -> str:
    """'converging' or 'diverging' from the trend of the term magnitudes
    (log-linear fit sign over the last half).

    Conjugate exponent classes of one branch can differ by orders of
    magnitude and interleave, so the fit runs on window maxima rather
    than raw terms: the dominant class sets the trend and the small
    classes cannot drag the slope the wrong way.
    """
    tail = [m for m in mags if m > 0]
    if len(tail) < 4:
        raise ValueError("profile needs at least 4 nonzero magnitudes")
    tail = tail[-max(4, len(tail) // 2):]
    if len(tail) >= 8:
        # windows are anchored at the end so the highest-order terms are
        # always part of the fit
        w = len(tail) // 4
        tail = [max(tail[len(tail) - (4 - i) * w:len(tail) - (3 - i) * w])
                for i in range(4)]
    with mpmath.workdps(30):
        logs = [mpmath.log10(m) for m in tail]
        n = len(logs)
        xbar = mpf(n - 1) / 2
        ybar = sum(logs) / n
        num = sum((i - xbar) * (y - ybar) for i, y in enumerate(logs))
        den = sum((i - xbar) ** 2 for i in range(n))
        return "diverging" if num / den > 0 else "converging"


# ---------------------------------------------------------------------------
# conjugate-orbit grouping of polygon leaves


def _signature(leaf: PolygonLeaf):
    exps = [e for e, _ in leaf.prefix] + [leaf.tail_shift]
    vals = [c.value for _, c in leaf.prefix] + [leaf.rk.value]
    return exps, vals


def _match_tol(leaves):
    acc = min(min((c.accuracy for _, c in lf.prefix), default=lf.rk.accuracy)
              for lf in leaves)
    acc = min(acc, min(lf.rk.accuracy for lf in leaves))
    return max(5, acc // 2)


def orbits(leaves: Sequence[PolygonLeaf]):
    """Group leaves into conjugacy classes of size d.

    Two leaves are conjugate when one's prefix and characteristic root are
    the unit-root twist of the other's.  Every class must close up with
    exactly d members, one per twist; anything else means the expansion
    lost too much accuracy to separate sheets.
    """
    out = []
    by_path: dict = {}
    for lf in leaves:
        by_path.setdefault(lf.lams, []).append(lf)
    for lams, group in sorted(by_path.items()):
        d = group[0].d
        tol = _match_tol(group)
        dps = group[0].rk.dps
        taken = [False] * len(group)
        for a_idx, a in enumerate(group):
            if taken[a_idx]:
                continue
            exps, avals = _signature(a)
            members = [a]
            taken[a_idx] = True
            with mpmath.workdps(dps + GUARD_DIGITS):
                om = mpmath.expjpi(mpf(2) / d) if d > 1 else mpc(1)
                for j in range(1, d):
                    want = [v * om ** int(j * e * d) for e, v in zip(exps, avals)]
                    hits = []
                    for b_idx, b in enumerate(group):
                        if taken[b_idx]:
                            continue
                        _, bvals = _signature(b)
                        if len(bvals) != len(want):
                            continue
                        if all(abs(x - y) < mpf(10) ** -tol
                               for x, y in zip(bvals, want)):
                            hits.append(b_idx)
                    if len(hits) > 1:
                        raise AmbiguousMatchError(
                            "two sheets are indistinguishable at accuracy "
                            f"{tol}; raise the working precision")
                    if not hits:
                        raise InvariantViolation(
                            f"conjugacy class of cycle {d} did not close up")
                    members.append(group[hits[0]])
                    taken[hits[0]] = True
            out.append(members)
    return out


# ---------------------------------------------------------------------------
# top-level expansion driver


def expand(f, precision: int, terms: int):
    """All branches of f(z, w) = 0 at the origin.

    Returns a list of PuiseuxSeries whose cycle numbers sum to the
    w-degree; each carries ``terms`` tail coefficients.  f may be a BiPoly
    or input text.
    """
    from . import algebra, polygon

    if isinstance(f, str):
        f = algebra.parse(f)
    g, E = polygon.normalize(f)
    num = polygon.NumBiPoly.from_exact(g, precision)
    _, leaves = polygon.polygon_tree(num)
    out = []
    for members in orbits(leaves):
        rep = members[0]
        reg = polygon.regular_form(rep)
        tail, acc = iterate(reg, terms)
        out.append(PuiseuxSeries(
            E=E, d=rep.d, prefix=tuple((e, c.value) for e, c in rep.prefix),
            tail_shift=rep.tail_shift, tail=tuple(tail),
            accuracy=acc, dps=precision))
    if sum(s.d for s in out) != g.degree_w:
        raise InvariantViolation("branch cycle numbers do not sum to the degree")
    return out


# ---------------------------------------------------------------------------
# document serialization


def to_doc(s: PuiseuxSeries) -> dict:
    def num(c):
        return numerics.to_text(SigComplex(c, s.accuracy, s.dps))
    return {
        "pole_order": s.E,
        "cycle": s.d,
        "label": s.label,
        "accuracy": s.accuracy,
        "prefix": [[str(e), num(c)] for e, c in s.prefix],
        "tail_shift": str(s.tail_shift),
        "tail": [num(c) for c in s.tail],
    }


def from_doc(doc: dict) -> PuiseuxSeries:
    prefix = tuple((Fraction(e), numerics.from_text(t).value)
                   for e, t in doc["prefix"])
    tail = tuple(numerics.from_text(t).value for t in doc["tail"])
    dps = numerics.from_text(doc["tail"][0]).dps if doc["tail"] else \
        numerics.DEFAULT_PRECISION
    return PuiseuxSeries(
        E=int(doc["pole_order"]), d=int(doc["cycle"]), prefix=prefix,
        tail_shift=Fraction(doc["tail_shift"]), tail=tail,
        accuracy=int(doc["accuracy"]), dps=dps, label=doc.get("label", ""))


def to_json(series_list) -> str:
    return json.dumps([to_doc(s) for s in series_list], indent=2)
