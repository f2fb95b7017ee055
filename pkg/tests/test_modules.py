import itertools
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import HYP, S, T
from solgap.linalg import Matrix
from solgap.modules import (
    DimensionMismatch,
    NortonCertificate,
    NotInvariant,
    Submodule,
    hom_space,
    is_irreducible,
    restrict,
    simple_submodule_reps,
    spin,
)

e1 = (Fraction(1), Fraction(0))
e2 = (Fraction(0), Fraction(1))


def M(rows):
    return Matrix(rows)


def test_spin_leaves_the_line():
    assert spin([e2], [M(T)]).dim == 2


def test_spin_fixed_line():
    W = spin([e1], [M(T)])
    assert W.basis == (e1,)


def test_spin_empty_seed():
    assert spin([], [M(T)]).dim == 0


def test_spin_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        spin([(1, 0, 0)], [M(T)])
    with pytest.raises(DimensionMismatch):
        spin([e1], [M(T), Matrix.identity(3)])


def test_sl2_is_irreducible_with_checkable_certificate():
    gens = [M(S), M(T)]
    ok, cert = is_irreducible(gens)
    assert ok and isinstance(cert, NortonCertificate)
    assert cert.check(gens)
    assert NortonCertificate.from_json(cert.to_json()) == cert


def test_unipotent_reducible():
    ok, W = is_irreducible([M(T)])
    assert not ok and W.basis == (e1,)


def test_identity_reducible():
    ok, W = is_irreducible([Matrix.identity(2)])
    assert not ok and W.basis == (e1,)


def test_simple_reps_examples():
    reps = simple_submodule_reps([M(T)])
    assert len(reps) == 1
    assert reps[0].submodule.basis == (e1,) and reps[0].restricted_gens == (Matrix([[1]]),)
    reps = simple_submodule_reps([Matrix.identity(2)])
    assert len(reps) == 1 and reps[0].submodule.basis == (e1,)
    reps = simple_submodule_reps([M(S).T, M(T).T])
    assert len(reps) == 1 and reps[0].submodule.dim == 2


def test_restrict_examples():
    assert restrict([M(HYP)], Submodule.whole(2)).restricted_gens == (M(HYP),)
    assert restrict([M(T)], Submodule.span([e1], 2)).restricted_gens == (Matrix([[1]]),)
    assert restrict([Matrix.diag([2, 3])], Submodule.span([e2], 2)).restricted_gens == (Matrix([[3]]),)
    with pytest.raises(NotInvariant):
        restrict([M(T)], Submodule.span([e2], 2))


def test_diagonal_with_distinct_characters_has_two_classes():
    reps = simple_submodule_reps([Matrix.diag([2, 3])])
    assert len(reps) == 2
    assert {r.restricted_gens[0][0, 0] for r in reps} == {2, 3}


def test_hom_space_dimension():
    # End of the trivial 2-dim module is all of M_2
    assert len(hom_space([Matrix.identity(2)], [Matrix.identity(2)])) == 4
    # rotation by 90 degrees: End is Q(i), dimension 2
    assert len(hom_space([M(S)], [M(S)])) == 2


# ---------------------------------------------------------------------------
# brute-force oracle: invariant lines are common rational eigenvectors


def sym(m: Matrix):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in m.entries])


def common_lines(gens):
    """(eigenvalue tuple, basis of joint eigenspace) for every rational joint eigenvalue."""
    sgens = [sym(g) for g in gens]
    per_gen = []
    for g in sgens:
        per_gen.append([ev for ev in g.eigenvals() if ev.is_rational])
    out = []
    for lams in itertools.product(*per_gen):
        stacked = sympy.Matrix.vstack(*[g - lam * sympy.eye(g.rows) for g, lam in zip(sgens, lams)])
        ns = stacked.nullspace()
        if ns:
            out.append((lams, ns))
    return out


def check_against_brute_force(gens):
    reps = simple_submodule_reps(gens)
    for r in reps:
        assert r.consistent_with(gens)
        assert is_irreducible(list(r.restricted_gens))[0]
        W = r.submodule
        for g in gens:
            for v in W.basis:
                assert W.contains(g.apply(v))
    # pairwise non-isomorphic
    for r1, r2 in itertools.combinations(reps, 2):
        assert not hom_space(list(r1.restricted_gens), list(r2.restricted_gens))
    lines = common_lines(gens)
    line_classes = {tuple(Fraction(int(x.p), int(x.q)) for x in lams) for lams, _ in lines}
    rep_classes = {tuple(m[0, 0] for m in r.restricted_gens) for r in reps if r.submodule.dim == 1}
    assert line_classes == rep_classes
    d = gens[0].rows
    if d == 2:
        # no invariant line means Q^2 is simple, and then it is the only class
        if not lines:
            assert len(reps) == 1 and reps[0].submodule.dim == 2
        else:
            assert all(r.submodule.dim == 1 for r in reps)


small = st.integers(-3, 3)


def mats(d):
    return st.lists(st.lists(small, min_size=d, max_size=d), min_size=d, max_size=d).map(Matrix)


def triangular(d):
    return mats(d).map(lambda m: Matrix([[m[i, j] if j >= i else 0 for j in range(d)] for i in range(d)]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.one_of(mats(2), triangular(2)), min_size=1, max_size=2))
def test_d2_matches_eigenvector_enumeration(gens):
    check_against_brute_force(gens)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.one_of(mats(3), triangular(3)), min_size=1, max_size=2))
def test_d3_line_classes_match(gens):
    check_against_brute_force(gens)


@settings(max_examples=40, deadline=None)
@given(st.lists(mats(3), min_size=1, max_size=2), st.lists(st.lists(small, min_size=3, max_size=3), max_size=2))
def test_spin_invariant_monotone_idempotent(gens, seeds):
    W = spin(seeds, gens, 3)
    for g in gens:
        for v in W.basis:
            assert W.contains(g.apply(v))
    for s in seeds:
        assert W.contains(s)
    assert spin(list(W.basis), gens, 3) == W


def test_submodule_json_round_trip():
    W = Submodule.span([(1, 2, 3), (0, 1, Fraction(1, 2))], 3)
    assert Submodule.from_json(W.to_json()) == W
