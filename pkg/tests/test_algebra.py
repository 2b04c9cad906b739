"""Polynomial, resultant, root-finder, and fiber tests."""
from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf

from puiseux import algebra as A
from puiseux.algebra import BiPoly, UniPoly, cluster, fiber, parse, resultant_w, roots
from puiseux.errors import DegenerateFiberError, ParseError
from puiseux.numerics import is_numerically_zero

CUBIC = "(78+49 z-46 z^2)+(-2 z) w+(91-34 z-80 z^2) w^2+(52 z+47 z^2) w^3"
TEST1 = ("(z^14+3 z^15)+(2 z^15+2 z^16)w+(3 z^15-20 z^16)w^2+(4 z^15)w^3"
         "+(10 z^5-z^6+2 z^7)w^4+(8 z^10)w^5+(9 z^10)w^6+(20 z)w^7+(3 z)w^8"
         "+(2)w^9+(5)w^10")


def test_parse_cubic():
    f = parse(CUBIC)
    assert f.degree_w == 3
    assert f.coeff(3) == UniPoly([0, 52, 47])
    assert f.coeff(1) == UniPoly([0, -2])


def test_parse_simple():
    f = parse("w^2 - z")
    assert f.degree_w == 2
    assert f.coeff(0) == UniPoly([0, -1])
    assert f.coeff(2) == UniPoly([1])


def test_parse_product_form():
    f = parse("z - (w-1)(w-2)^2(w-3)^3(w-4)^4")
    assert f.degree_w == 10
    assert f.coeff(10) == UniPoly([-1])
    # constant term of a_0 is -(1 * 2^2 * 3^3 * 4^4) + z
    assert f.coeff(0) == UniPoly([-27648, 1])


def test_parse_roundtrip():
    for text in [CUBIC, TEST1, "w^2 - z"]:
        f = parse(text)
        assert parse(A.serialize(f)) == f
        assert parse(A.serialize_doc(f)) == f


def test_parse_rejects_nonpolynomial():
    with pytest.raises(ParseError):
        parse("w^2 - sin(z)")
    with pytest.raises(ParseError):
        parse("w^2 @ z")


def test_parse_decimal_becomes_exact_rational():
    f = parse("w^2 - 0.5 z")
    assert f.coeff(0) == UniPoly([0, Fraction(-1, 2)])


def test_support_test1():
    s = A.support(parse(TEST1))
    for pt in [(0, 14), (4, 5), (7, 1), (10, 0)]:
        assert pt in s


def test_support_trivial_and_omission():
    assert A.support(parse("w^2 - z")) == {(0, 1), (2, 0)}
    f = BiPoly([UniPoly([0, 1]), UniPoly([]), UniPoly([1])])  # a_1 = 0
    assert A.support(f) == {(0, 1), (2, 0)}


def _sylvester_2x2(a0: UniPoly):
    # Res(w^2 + a0, 2w) by hand: det [[1,0,a0],[2,0,0],[0,2,0]] = 4*a0
    return 4 * a0


def test_resultant_w2_minus_z():
    f = parse("w^2 - z")
    r = resultant_w(f)
    assert r == _sylvester_2x2(UniPoly([0, -1])) or r == UniPoly([0, -4])
    assert r.order == 1 and r.degree == 1  # vanishes only at 0


def test_resultant_w2_minus_1_plus_z():
    r = resultant_w(parse("w^2 - (1 - z)"))
    # 4*(z-1): vanishes only at z=1
    assert r == UniPoly([-4, 4])


def test_resultant_no_ramification():
    r = resultant_w(parse("w - (3 + 2 z + z^2)"))
    assert r.degree == 0 and r.coeffs[0] != 0


def test_square_free_strips_multiplicities():
    # (z-1)^3 (z+2)^2 (z-5)  ->  (z-1)(z+2)(z-5)
    a, b, c = UniPoly([-1, 1]), UniPoly([2, 1]), UniPoly([-5, 1])
    p = a * a * a * b * b * c
    q = A.square_free(p)
    assert q.degree == 3
    vals = sorted(float(r.value.real) for r in roots(q, 50))
    assert vals == pytest.approx([-2.0, 1.0, 5.0], abs=1e-40)


def test_square_free_identity_on_simple_roots():
    p = UniPoly([-6, 11, -6, 1])  # (z-1)(z-2)(z-3)
    q = A.square_free(p)
    assert q.degree == 3
    assert tuple(c / q.coeffs[-1] for c in q.coeffs) == p.coeffs


def test_roots_z2_plus_1():
    rs = roots(UniPoly([1, 0, 1]), 50)
    assert len(rs) == 2
    assert mpmath.almosteq(rs[0].value, mpmath.mpc(0, -1), abs_eps=mpf(10) ** -45)
    assert mpmath.almosteq(rs[1].value, mpmath.mpc(0, 1), abs_eps=mpf(10) ** -45)


def test_roots_wilkinson():
    p = UniPoly([1])
    for k in range(1, 11):
        p = p * UniPoly([-k, 1])
    rs = roots(p, 120)
    for k, r in enumerate(rs, start=1):
        assert mpmath.almosteq(r.value, k, abs_eps=mpf(10) ** -100)
        assert r.accuracy > 100


def test_roots_test1_resultant_moduli():
    res = resultant_w(parse(TEST1))
    stripped = UniPoly(res.coeffs[res.order:])
    rs = roots(stripped, 120)
    mods = sorted(abs(r.value) for r in rs)
    for expect in ["0.002469", "0.3329", "0.3341", "0.636"]:
        assert any(abs(m - mpf(expect)) < mpf(expect) * mpf("1e-3") for m in mods)


def test_roots_ordering():
    rs = roots(UniPoly([-1, 0, 0, 0, 1]), 60)  # 4th roots of unity
    keys = [(r.value.real, r.value.imag) for r in rs]
    assert keys == sorted(keys)


CHAR10 = UniPoly([27648, -110592, 192384, -192832, 123852, -53428,
                  15715, -3118, 400, -30, 1])


def test_cluster_multiple_roots_low_accuracy():
    rs = roots(CHAR10, 100)
    merged = cluster(rs, 20)
    assert sorted(c.multiplicity for c in merged) == [1, 2, 3, 4]
    centers = sorted(round(float(c.center.value.real)) for c in merged)
    assert centers == [1, 2, 3, 4]


def test_cluster_distinct_at_full_accuracy():
    rs = roots(CHAR10, 100)
    assert all(c.multiplicity == 1 for c in cluster(rs, 90))


def test_cluster_trivial_cases():
    rs = roots(UniPoly([1, 0, 1]), 50)
    cl = cluster(rs, 40)
    assert [c.multiplicity for c in cl] == [1, 1]
    triple = [rs[0], rs[0], rs[0]]
    cl = cluster(triple, 40)
    assert len(cl) == 1 and cl[0].multiplicity == 3


def test_cluster_is_partition():
    rs = roots(CHAR10, 100)
    cl = cluster(rs, 20)
    assert sum(c.multiplicity for c in cl) == len(rs)
    seen = [m for c in cl for m in c.members]
    assert len(seen) == len(rs)


def test_fiber_w2_minus_z():
    f = parse("w^2 - z")
    fb = fiber(f, mpmath.mpf(4), 60)
    vals = sorted(v.value.real for v in fb.values)
    assert mpmath.almosteq(vals[0], -2) and mpmath.almosteq(vals[1], 2)
    assert mpmath.almosteq(fb.p_min, 4)


def test_fiber_cube_roots():
    fb = fiber(parse("w^3 - z"), mpmath.mpf(1), 60)
    assert len(fb.values) == 3
    with mpmath.workdps(60):
        assert mpmath.almosteq(fb.p_min, mpmath.sqrt(3), rel_eps=mpf(10) ** -50)


def test_fiber_residuals_vanish():
    f = parse(TEST1)
    fb = fiber(f, mpmath.mpf("0.001"), 80)
    assert len(fb.values) == 10
    for v in fb.values:
        r = f.eval_mpc(mpmath.mpf("0.001"), v.value, 80)
        assert abs(r) < mpf(10) ** -40


def test_fiber_at_pole_raises():
    f = parse("(1) + (1) w + (z) w^2")
    with pytest.raises(DegenerateFiberError):
        fiber(f, mpmath.mpf(0), 50)
