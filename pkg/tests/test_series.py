"""Series iteration, conjugate sheets, evaluation, and serialization."""
from fractions import Fraction

import mpmath
import pytest
from mpmath import mpc, mpf

from puiseux import polygon as P
from puiseux import series as S
from puiseux.algebra import parse
from puiseux.errors import NotSimpleRootError
from puiseux.series import (
    PuiseuxSeries,
    classify_profile,
    expand,
    from_doc,
    iterate,
    orbits,
    residual_order,
    to_doc,
)

CUBIC = "(78+49 z-46 z^2)+(-2 z) w+(91-34 z-80 z^2) w^2+(52 z+47 z^2) w^3"
TEST1 = ("(z^14+3 z^15)+(2 z^15+2 z^16)w+(3 z^15-20 z^16)w^2+(4 z^15)w^3"
         "+(10 z^5-z^6+2 z^7)w^4+(8 z^10)w^5+(9 z^10)w^6+(20 z)w^7+(3 z)w^8"
         "+(2)w^9+(5)w^10")


def _leaves(text, precision=120):
    g, _ = P.normalize(parse(text))
    _, leaves = P.polygon_tree(P.NumBiPoly.from_exact(g, precision))
    return leaves


# -- truncated series helpers -------------------------------------------------


def test_series_mul_div_roundtrip():
    with mpmath.workdps(40):
        a = [mpc(3), mpc(-1), mpc(2), mpc(0), mpc(5)]
        b = [mpc(1), mpc(4), mpc(-2)]
        q = S._div(S._mul(a, b, 8), b, 5)
        for x, y in zip(q, a):
            assert abs(x - y) < mpf(10) ** -30


# -- Newton iteration ---------------------------------------------------------


def test_iterate_square_root_of_one_plus_z():
    # the tail of w^2 = 1 + z is the binomial series for sqrt(1+z)
    lf = [l for l in _leaves("w^2 - (1+z)") if l.rk.value.real > 0][0]
    tail, acc = iterate(P.regular_form(lf), 8)
    expected = [Fraction(1), Fraction(1, 2), Fraction(-1, 8), Fraction(1, 16),
                Fraction(-5, 128), Fraction(7, 256), Fraction(-21, 1024),
                Fraction(33, 2048)]
    with mpmath.workdps(120):
        for c, e in zip(tail, expected):
            assert abs(c - mpf(e.numerator) / e.denominator) < mpf(10) ** -100
    assert acc > 100


def test_iterate_exact_square_root_branch():
    # w^2 = z has tail identically 1 in the z^(1/2) variable
    lf = [l for l in _leaves("w^2 - z") if l.rk.value.real > 0][0]
    tail, _ = iterate(P.regular_form(lf), 12)
    with mpmath.workdps(120):
        assert abs(tail[0] - 1) < mpf(10) ** -100
        assert all(abs(c) < mpf(10) ** -100 for c in tail[1:])


def test_iterate_rejects_multiple_root():
    rows = ((mpc(0), mpc(-1)), (mpc(0), mpc(0)), (mpc(1), mpc(0)))
    from puiseux.numerics import SigComplex
    reg = P.RegularPoly(rows, 1, SigComplex(0, 100, 100), 90, 100)
    with pytest.raises(NotSimpleRootError):
        iterate(reg, 4)


def test_residual_order_reaches_window():
    for lf in _leaves(TEST1):
        reg = P.regular_form(lf)
        tail, _ = iterate(reg, 16)
        assert residual_order(reg, tail) >= 16


def test_residual_order_detects_perturbation():
    lf = _leaves(TEST1)[0]
    reg = P.regular_form(lf)
    tail, _ = iterate(reg, 16)
    bad = list(tail)
    with mpmath.workdps(reg.dps):
        bad[3] = bad[3] + mpf(10) ** -10
    assert residual_order(reg, bad) <= 3


# -- conjugate orbits ---------------------------------------------------------


def test_orbits_test1_cycles():
    groups = orbits(_leaves(TEST1))
    assert sorted(len(g) for g in groups) == [1, 2, 3, 4]
    for g in groups:
        assert all(lf.d == len(g) for lf in g)


def test_orbits_square_root():
    groups = orbits(_leaves("w^2 - z"))
    assert len(groups) == 1 and len(groups[0]) == 2


# -- expansion and evaluation -------------------------------------------------


def test_expand_square_root_values():
    (s,) = expand("w^2 - z", 100, 8)
    assert s.d == 2 and s.E == 0 and s.prefix == ()
    with mpmath.workdps(110):
        v0 = s.eval(mpf("0.25"), 0)
        v1 = s.eval(mpf("0.25"), 1)
        assert abs(abs(v0) - mpf("0.5")) < mpf(10) ** -90
        assert abs(v0 + v1) < mpf(10) ** -90  # the two sheets are opposite


def test_expand_cubic_residuals_and_pole():
    branches = expand(CUBIC, 120, 24)
    assert sum(s.d for s in branches) == 3
    assert all(s.E == 1 for s in branches)
    f = parse(CUBIC)
    with mpmath.workdps(130):
        z0 = mpf("0.001")
        for s in branches:
            for j in s.sheets():
                w = s.eval(z0, j)
                assert abs(f.eval_mpc(z0, w, 130)) < mpf(10) ** -40
        # a pole of order one: w z stays bounded away from 0 as z -> 0
        assert any(abs(s.eval(mpf("1e-8"), 0)) > mpf(10) ** 6 for s in branches)


def test_expand_test1_matches_fiber():
    from puiseux.algebra import fiber
    branches = expand(TEST1, 150, 32)
    assert sorted(s.d for s in branches) == [1, 2, 3, 4]
    f = parse(TEST1)
    with mpmath.workdps(160):
        z0 = mpf("0.0001")
        fib = fiber(f, z0, 150)
        vals = [s.eval(z0, j) for s in branches for j in s.sheets()]
        assert len(vals) == 10
        tol = fib.p_min / 100
        used = set()
        for v in vals:
            best = min(range(10), key=lambda i: abs(v - fib.values[i].value))
            assert abs(v - fib.values[best].value) < tol
            used.add(best)
        assert len(used) == 10  # a bijection, not a pile-up


def test_exponents_are_sorted_and_cycle_consistent():
    for s in expand(TEST1, 120, 12):
        exps = s.exponents()
        assert exps == sorted(exps)
        assert all((q * s.d).denominator == 1 for q in exps)


# -- convergence profiles -----------------------------------------------------


def test_profile_geometric_series():
    # w = 1/(1 - 2z) diverges past |z| = 1/2
    (s,) = expand("(1 - 2 z) w - 1", 80, 40)
    assert classify_profile(s.term_magnitudes(mpf("0.25"))) == "converging"
    assert classify_profile(s.term_magnitudes(mpf("0.8"))) == "diverging"


# -- serialization ------------------------------------------------------------


def test_doc_roundtrip():
    for s in expand(TEST1, 100, 10):
        t = from_doc(to_doc(s))
        assert (t.E, t.d, t.tail_shift) == (s.E, s.d, s.tail_shift)
        assert len(t.tail) == len(s.tail)
        with mpmath.workdps(110):
            z0 = mpf("0.001")
            assert abs(t.eval(z0, 0) - s.eval(z0, 0)) < mpf(10) ** -60


def test_expand_deterministic():
    a = expand(TEST1, 100, 10)
    b = expand(TEST1, 100, 10)
    for x, y in zip(a, b):
        assert x.tail == y.tail and x.prefix == y.prefix
