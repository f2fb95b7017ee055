import itertools
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import HYP, S, T
from solgap.linalg import Matrix, minpoly
from solgap.zariski import (
    LieAlgebra,
    Singular,
    classify_group,
    congruence_certificate,
    envelope,
    has_infinite_order,
    jordan,
    lie_closure,
    lie_of_cyclic,
    nilpotent_log,
)

D = Matrix.diag([2, Fraction(1, 2)])
E12 = Matrix([[0, 1], [0, 0]])


def sym(m: Matrix):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in m.entries])


def brute_group(gens, cap=5000):
    """Closure under multiplication by generators, exact."""
    n = gens[0].rows
    seen = {Matrix.identity(n)}
    frontier = [Matrix.identity(n)]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x @ g
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > cap:
                        return None
        frontier = nxt
    return seen


def test_lie_of_cyclic_examples():
    assert lie_of_cyclic(D).same_space(LieAlgebra.spanned_by(2, [Matrix.diag([1, -1])]))
    assert lie_of_cyclic(Matrix(S)).dim == 0
    assert lie_of_cyclic(Matrix(T)).same_space(LieAlgebra.spanned_by(2, [E12]))
    assert lie_of_cyclic(Matrix(HYP)).dim == 1


def test_singular_rejected():
    with pytest.raises(Singular):
        lie_of_cyclic(Matrix([[1, 2], [2, 4]]))
    with pytest.raises(Singular):
        classify_group([Matrix([[0, 0], [0, 1]])])


def test_lie_closure_examples():
    assert lie_closure([Matrix(S), Matrix(T)]).dim == 3
    assert lie_closure([Matrix.identity(2)]).dim == 0
    L = lie_closure([D, Matrix(S)])
    assert L.same_space(LieAlgebra.spanned_by(2, [Matrix.diag([1, -1])]))


def test_torsion_generated_sl2():
    # S and ST both have finite order yet generate SL2(Z)
    ST = Matrix(S) @ Matrix(T)
    assert lie_closure([Matrix(S), ST]).dim == 3
    assert classify_group([Matrix(S), ST]).tag == "NonSolvable"


def test_classify_examples():
    assert classify_group([Matrix(HYP)]).tag == "VirtuallyAbelian"
    assert classify_group([Matrix(S), Matrix(T)]).tag == "NonSolvable"
    c = classify_group([Matrix(S)])
    assert c.tag == "Finite" and c.order == 4 and str(c) == "Finite(4)"
    assert classify_group([D, Matrix(S)]).tag == "VirtuallyAbelian"


def test_baumslag_solitar_is_solvable_not_abelian():
    gens = [Matrix.diag([2, 1]), Matrix(T)]
    c = classify_group(gens)
    assert c.tag == "VirtuallySolvable"
    assert c.virtually_abelian is False
    assert not envelope(gens).commutative


def test_envelope_commutes_for_abelian_groups():
    assert envelope([Matrix(HYP)]).commutative
    assert envelope([D, Matrix(S)]).commutative
    env = envelope([Matrix(S), Matrix(T)])
    X, Y = env.witness
    assert not X.commutator(Y).is_zero()


def test_congruence_kernel_for_finite_group():
    res = congruence_certificate([Matrix(S)], 3, 1000)
    assert res.image_order == 4 and res.trivial


# ---------------------------------------------------------------------------
# Jordan decomposition and logarithm


small = st.integers(-3, 3)


def invertible(d):
    return st.lists(st.lists(small, min_size=d, max_size=d), min_size=d, max_size=d).map(Matrix).filter(lambda m: m.det() != 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3).flatmap(invertible))
def test_jordan_properties(g):
    s, u = jordan(g)
    n = g.rows
    assert s @ u == g and s @ u == u @ s
    N = sym(u) - sympy.eye(n)
    assert (N ** n).is_zero_matrix
    x = sympy.Symbol("x")
    m = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(minpoly(s).coeffs)], x)
    assert sympy.degree(sympy.gcd(m, m.diff(x)), x) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.lists(small, min_size=n * n, max_size=n * n).map(
    lambda v: Matrix([[v[i * n + j] if j > i else 0 for j in range(n)] for i in range(n)]))))
def test_log_inverts_exp(N):
    n = N.rows
    u = Matrix.identity(n) + N
    L = sym(nilpotent_log(u))
    exp = sum((L ** k / sympy.factorial(k) for k in range(1, n + 1)), sympy.eye(n))
    assert exp == sym(u)


# ---------------------------------------------------------------------------
# closure properties


POOL = [Matrix(S), Matrix(T), Matrix(HYP), D, Matrix([[0, 1], [1, 0]]), Matrix([[1, 0], [0, -1]]),
        Matrix([[1, 0], [1, 1]]), Matrix([[-1, 0], [0, -1]])]


def gen_sets():
    return st.lists(st.sampled_from(POOL), min_size=1, max_size=3)


@settings(max_examples=30, deadline=None)
@given(gen_sets())
def test_closure_is_lie_algebra_containing_cyclic_parts(gens):
    L = lie_closure(gens)
    assert L.is_bracket_closed()
    assert L.is_ad_invariant(gens)
    for g in gens:
        assert L.contains_algebra(lie_of_cyclic(g))


@settings(max_examples=30, deadline=None)
@given(gen_sets(), st.sampled_from(POOL))
def test_closure_monotone(gens, extra):
    assert lie_closure(gens + [extra]).dim >= lie_closure(gens).dim


@settings(max_examples=25, deadline=None)
@given(gen_sets(), st.sampled_from([Matrix([[1, 1], [0, 1]]), Matrix([[2, 1], [1, 1]]), Matrix([[1, 2], [3, 4]]),
                                    Matrix([[0, 3], [1, 0]])]))
def test_closure_conjugation_equivariant(gens, h):
    hi = h.inverse()
    conj = [h @ g @ hi for g in gens]
    assert lie_closure(conj).same_space(lie_closure(gens).conjugate(h))


@settings(max_examples=25, deadline=None)
@given(gen_sets(), st.data())
def test_classification_ignores_redundant_words(gens, data):
    length = data.draw(st.integers(1, 3))
    idx = data.draw(st.lists(st.integers(0, len(gens) - 1), min_size=length, max_size=length))
    w = Matrix.identity(2)
    for i in idx:
        w = w @ gens[i]
    a, b = classify_group(gens), classify_group(gens + [w])
    assert a.tag == b.tag
    if a.tag == "Finite":
        assert a.order == b.order


def signed_permutations(d):
    out = []
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product([1, -1], repeat=d):
            out.append(Matrix([[signs[i] if perm[i] == j else 0 for j in range(d)] for i in range(d)]))
    return out


@pytest.mark.parametrize("d", [2, 3])
def test_finite_groups_match_brute_force(d):
    rng = random.Random(7)
    pool = signed_permutations(d)
    for _ in range(12):
        gens = rng.sample(pool, rng.randint(1, 3))
        c = classify_group(gens)
        ref = brute_group(gens)
        assert c.tag == "Finite" and c.order == len(ref)
        elems = set(c.congruence.elements)
        assert elems == ref
        for x, y in itertools.product(list(elems)[:20], repeat=2):
            assert x @ y in elems
        for x in elems:
            assert x.inverse() in elems
        for g in gens:
            assert g in elems


def test_infinite_order_detection():
    assert has_infinite_order(Matrix(T))
    assert has_infinite_order(Matrix(HYP))
    assert not has_infinite_order(Matrix(S))
    assert not has_infinite_order(Matrix([[0, -1], [1, 1]]))


def test_lie_json_round_trip():
    L = lie_closure([Matrix(S), Matrix(T)])
    assert LieAlgebra.from_json(L.to_json(), 2).same_space(L)
