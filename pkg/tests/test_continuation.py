"""Continuation machinery: integration, local bases, ring elimination."""
from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf

from puiseux import continuation as C
from puiseux import landscape as L
from puiseux.algebra import parse
from puiseux.errors import IntegrationError
from puiseux.numerics import SigComplex

# three branches: an entire sheet w = 2 + z and a square-root pair that
# ramifies at z = 1; the resultant also vanishes at the two points where
# the entire sheet crosses the square-root values without ramification
MIXED = "(w - 2 - z)(w^2 - (1 - z))"


# -- numerical integration ----------------------------------------------------


def test_integrate_stays_on_sheet():
    f = parse("w^2 - z")
    w = C.integrate_sheet(f, mpf(1), mpf(1), mpf(4), 40, 30)
    with mpmath.workdps(45):
        assert abs(w - 2) < mpf(10) ** -28


def test_integrate_complex_path():
    # follow sqrt around a quarter turn: sqrt(i) = e^{i pi/4}
    f = parse("w^2 - z")
    w = C.integrate_sheet(f, mpf(1), mpf(1), mpmath.mpc(0, 1), 40, 30)
    with mpmath.workdps(45):
        want = mpmath.expjpi(mpf(1) / 4)
        assert abs(w - want) < mpf(10) ** -27


def test_integrate_vectorized_matches_scalar():
    f = parse(MIXED)
    start, end = mpf("0.1"), mpf("0.4")
    with mpmath.workdps(60):
        ws = [mpf(2) + start, mpmath.sqrt(1 - start), -mpmath.sqrt(1 - start)]
    got = C.integrate_sheets(f, start, ws, end, 40, 30)
    for w0, wv in zip(ws, got):
        ws1 = C.integrate_sheet(f, start, w0, end, 40, 30)
        assert abs(ws1 - wv) < mpf(10) ** -25
    with mpmath.workdps(45):
        assert abs(got[0] - (2 + end)) < mpf(10) ** -26
        assert abs(got[1] - mpmath.sqrt(1 - end)) < mpf(10) ** -26


def test_integrate_raises_at_singular_start():
    f = parse("w^2 - z")
    with pytest.raises(IntegrationError):
        C.integrate_sheet(f, mpf(0), mpf(0), mpf(1), 40, 30, label="w_2")


# -- local expansions ---------------------------------------------------------


def test_shift_poly_taylor_coefficients():
    p = C._shift_poly(parse("w - z^2"), SigComplex.exact(2, 100), 100)
    row = p.terms[0]  # -(z + 2)^2 = -4 - 4z - z^2
    with mpmath.workdps(100):
        assert abs(row[Fraction(0)] + 4) < mpf(10) ** -90
        assert abs(row[Fraction(1)] + 4) < mpf(10) ** -90
        assert abs(row[Fraction(2)] + 1) < mpf(10) ** -90


def test_local_basis_square_root_point():
    f = parse("w^2 - (z - 1)")
    basis = C.local_basis(f, SigComplex.exact(1, 100), 100, 8)
    assert len(basis) == 1 and basis[0].d == 2
    assert C.is_singular_branch(basis[0])


def test_local_basis_pole_point():
    f = parse("(1) + (z - 1) w")
    basis = C.local_basis(f, SigComplex.exact(1, 100), 100, 8)
    assert len(basis) == 1 and basis[0].d == 1
    assert basis[0].E == 1
    assert C.is_singular_branch(basis[0])
    # w = -1/(z-1): value at zeta = 1/2 is -2
    with mpmath.workdps(100):
        assert abs(basis[0].eval(mpf("0.5"), 0) + 2) < mpf(10) ** -80


def test_local_basis_regular_point_not_singular():
    f = parse("w^2 - (z - 1)")
    basis = C.local_basis(f, SigComplex.exact(5, 100), 100, 8)
    assert len(basis) == 2
    assert not any(C.is_singular_branch(b) for b in basis)


# -- ring elimination ---------------------------------------------------------


def test_radii_square_root_branch():
    # two analytic sheets of sqrt(1 - z) that merge at the branch point z = 1
    rep = C.radii("w^2 - (1 - z)", precision=100, terms=16)
    assert len(rep.branches) == 2
    for b in rep.branches:
        assert b.cycle == 1
        assert b.ring_index == 1
        with mpmath.workdps(100):
            assert abs(b.modulus - 1) < mpf(10) ** -50


def test_radii_simple_pole():
    rep = C.radii("(1 - 2 z) w - 1", precision=100, terms=16)
    (b,) = rep.branches
    assert b.ring_index == 1
    with mpmath.workdps(100):
        assert abs(b.modulus - mpf("0.5")) < mpf(10) ** -50


def test_radii_mixed_function():
    # three analytic sheets at the origin, keyed by value at z_m:
    # w_{1,1} = -sqrt(1-z), w_{1,2} = +sqrt(1-z), w_{1,3} = 2 + z
    rep = C.radii(MIXED, precision=100, terms=24)
    by_label = {b.label: b for b in rep.branches}
    assert set(by_label) == {"w_{1,1}", "w_{1,2}", "w_{1,3}"}
    # the entire sheet survives every singular ring, sailing past the
    # value-crossings at |z| = 0.697 and 4.303 where nothing ramifies
    assert by_label["w_{1,3}"].ring_index is None
    # the square-root pair also passes ring one and stops at the true
    # branch point z = 1 on ring two
    for lbl in ("w_{1,1}", "w_{1,2}"):
        assert by_label[lbl].ring_index == 2
        with mpmath.workdps(100):
            assert abs(by_label[lbl].modulus - 1) < mpf(10) ** -40
    ring1 = [p for p in rep.points if p.ring_index == 1]
    assert ring1
    assert all(len(p.continuable) == 3 for p in ring1)


def test_radii_max_ring_cutoff():
    rep = C.radii(MIXED, precision=100, terms=24, max_ring=1)
    assert all(b.ring_index is None for b in rep.branches)
    assert rep.rings_processed == 1


def test_radii_integration_diagnostics_shape():
    rep = C.radii("w^2 - (1 - z)", precision=100, terms=16)
    assert rep.points
    for row in rep.points[0].integration:
        for key in ("branch", "z_s", "w_s", "z_e", "w_integrated",
                    "w_exact", "difference", "impinges"):
            assert key in row
        assert row["difference"] < mpf(10) ** -20


# -- empirical checks ---------------------------------------------------------


def test_random_point_check_converged_series():
    from puiseux.series import expand
    f = parse("w^2 - (1 - z)")
    for b in expand(f, 100, 48):
        err = C.random_point_check(b, f, mpf(1), 100, count=5, seed=7)
        assert err < mpf(10) ** -8


def test_random_point_check_is_seeded():
    from puiseux.series import expand
    f = parse("w^2 - (1 - z)")
    b = expand(f, 100, 32)[0]
    a = C.random_point_check(b, f, mpf(1), 100, count=3, seed=3)
    c = C.random_point_check(b, f, mpf(1), 100, count=3, seed=3)
    assert a == c


def test_straddle_points():
    scape = L.landscape(parse("w^2 - (1 - z)(4 - z)"), 100)
    assert len(scape.rings) == 2
    z_c, z_d = C.straddle_points(scape, 1, 100)
    with mpmath.workdps(100):
        assert abs(z_c - mpf("0.1")) < mpf(10) ** -50    # sqrt(r/100 * r)
        assert abs(z_d - mpf("1.25")) < mpf(10) ** -50   # 1.25 * r
    z_c2, z_d2 = C.straddle_points(scape, 2, 100)
    with mpmath.workdps(100):
        assert abs(z_c2 - 2) < mpf(10) ** -50            # sqrt(1 * 4)
        assert abs(z_d2 - 5) < mpf(10) ** -50            # 1.25 * r
