import itertools
from fractions import Fraction

import pytest
import sympy

from solgap.linalg import RatPoly
from solgap.numberfield import (
    AlgebraicNumber,
    QuadraticNumber,
    ZeroEigenvalue,
    cyclotomic,
    cyclotomic_order,
    eigenvalues,
    euler_phi,
    galois_stable_relations,
    mult_relation_lattice,
    rational,
    roots_of,
    verify_relation,
)

x = sympy.Symbol("x")


def exact(lam: AlgebraicNumber):
    """sympy radical for a root of degree <= 2, matched by numeric value."""
    sp = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(lam.min_poly.coeffs)], x)
    z = complex(lam.numeric(30))
    return min(sympy.roots(sp, x), key=lambda r: abs(complex(sympy.N(r, 30)) - z))


def is_relation(vals, e) -> bool:
    prod = sympy.Integer(1)
    for v, k in zip(vals, e):
        prod *= v ** k
    return sympy.simplify(sympy.expand(prod) - 1) == 0


def in_integer_span(basis, v) -> bool:
    if not any(v):
        return True
    if not basis:
        return False
    B = sympy.Matrix(basis).T
    try:
        sol, params = B.gauss_jordan_solve(sympy.Matrix(v))
    except ValueError:
        return False
    sol = sol.subs({p: 0 for p in params})
    return all(c.is_integer for c in sol)


def lams_of(*polys):
    out = []
    for coeffs in polys:
        out.extend(roots_of(RatPoly(coeffs)))
    return out


def brute_relations(vals, box):
    n = len(vals)
    return [e for e in itertools.product(range(-box, box + 1), repeat=n) if any(e) and is_relation(vals, e)]


CASES = [
    [rational(2), rational(4)],
    lams_of([1, -3, 1]),
    [rational(-1), rational(Fraction(1, 2)), rational(-2)],
    lams_of([1, 0, 1]),
    lams_of([1, -1, 1]) + [rational(-1)],
    lams_of([-2, 0, 1]) + [rational(2)],
]


@pytest.mark.parametrize("lams", CASES)
def test_quadratic_lattices_match_brute_force(lams):
    L = mult_relation_lattice(lams)
    assert L.complete
    vals = [exact(l) for l in lams]
    for e in L.basis:
        assert is_relation(vals, e)
    box = 6 if len(lams) <= 2 else 3
    for e in brute_relations(vals, box):
        assert in_integer_span(L.basis, e), e


def test_doubling_lattice():
    assert mult_relation_lattice([rational(2), rational(4)]).basis == [(2, -1)]


def test_reciprocal_pair():
    lams = lams_of([1, -3, 1])
    assert mult_relation_lattice(lams).basis == [(1, 1)]


def test_one_is_torsion():
    assert mult_relation_lattice([rational(1)]).basis == [(1,)]


def test_zero_rejected():
    with pytest.raises(ZeroEigenvalue):
        mult_relation_lattice([rational(0)])


def test_cube_roots_of_two_are_incomplete_but_sound():
    lams = lams_of([-2, 0, 0, 1])
    L = mult_relation_lattice(lams)
    assert not L.complete
    # the product of all three conjugates is 2, never 1, so nothing is claimed
    assert L.basis == []
    for e in galois_stable_relations(lams):
        prod = 1
        for lam, k in zip(lams, e):
            prod *= complex(lam.numeric(30)) ** k
        assert abs(prod - 1) < 1e-20


def test_roots_of_canonical_order():
    r = roots_of(RatPoly([1, -3, 1]))
    assert float(r[0].numeric().real) < float(r[1].numeric().real)
    c = roots_of(RatPoly([1, 0, 1]))
    assert float(c[0].numeric().imag) == -1.0 and float(c[1].numeric().imag) == 1.0


def test_algebraic_json_round_trip():
    for lam in lams_of([1, -3, 1], [-2, 0, 0, 1]):
        assert AlgebraicNumber.from_json(lam.to_json()) == lam


def test_eigenvalues_multiplicity():
    p = RatPoly([-1, 1]) * RatPoly([-1, 1]) * RatPoly([1, 0, 1])
    eig = eigenvalues(p)
    assert sorted(m for _, m in eig) == [1, 1, 2]


def test_quadratic_arithmetic_matches_sympy():
    q = QuadraticNumber(Fraction(3, 2), Fraction(1, 2), 5)
    s = sympy.Rational(3, 2) + sympy.sqrt(5) / 2
    for k in range(-3, 4):
        r = q ** k
        assert sympy.simplify(sympy.expand(s ** k) - (sympy.Rational(r.a.numerator, r.a.denominator)
                                                       + sympy.Rational(r.b.numerator, r.b.denominator) * sympy.sqrt(5))) == 0
    assert q.norm() == Fraction(9, 4) - Fraction(5, 4)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 8, 10, 12])
def test_cyclotomic_against_sympy(n):
    ref = sympy.Poly(sympy.cyclotomic_poly(n, x), x).all_coeffs()
    assert [int(c) for c in reversed(cyclotomic(n).coeffs)] == [int(c) for c in ref]
    assert cyclotomic_order(cyclotomic(n)) == n
    assert euler_phi(n) == sympy.totient(n)


def test_non_cyclotomic():
    assert cyclotomic_order(RatPoly([1, -3, 1])) is None
    assert cyclotomic_order(RatPoly([1, -1, 1])) == 6


def test_verify_relation_exact():
    lams = lams_of([1, -3, 1])
    assert verify_relation(lams, (1, 1))
    assert not verify_relation(lams, (1, 0))
