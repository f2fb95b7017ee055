import json
import random
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import corpus_problem, gen, problem, random_translation
from solgap.koopman import (
    NoConvergence,
    Truncation,
    TruncationTooLarge,
    build_operator,
    curve_csv,
    enumerate_characters,
    estimate_top,
    gap_curve,
)
from solgap.solenoid import SolenoidSpec, affine_inverse, dual_apply, pairing_phase

BASELINES = json.loads((Path(__file__).parent / "baselines.json").read_text())
F = Fraction


def test_negation_operator():
    spec, gens = corpus_problem("negation")
    op = build_operator(spec, gens, Truncation(2))
    assert [op.character(i) for i in range(op.size)] == [(-1,), (1,), (-2,), (2,)]
    assert list(op.images[0]) == [1, 0, 3, 2]
    assert not np.any(op.phases[0])


def test_rotation_phases():
    spec, gens = corpus_problem("rotation_third")
    op = build_operator(spec, gens, Truncation(1))
    assert list(op.images[0]) == [0, 1]
    A = op.matrix().toarray()
    # chi = -1 first, then chi = 1
    assert np.allclose(np.diag(A), [np.cos(2 * np.pi / 3)] * 2)
    assert np.isclose(np.exp(2j * np.pi * op.phases[0][1]), np.exp(2j * np.pi / 3))


def test_zero_height_rejected():
    with pytest.raises(ValueError):
        Truncation(0)


def test_identity_has_lambda_one():
    spec, gens = problem(1, 2, [gen([[1, 0], [0, 1]])])
    assert estimate_top(spec, gens, Truncation(5)).lam == pytest.approx(1.0, abs=1e-9)


def test_negation_lambda_one():
    spec, gens = corpus_problem("negation")
    assert estimate_top(spec, gens, Truncation(2)).lam == pytest.approx(1.0, abs=1e-5)


def test_sl2_below_one_matches_baseline():
    spec, gens = corpus_problem("sl2")
    est = estimate_top(spec, gens, Truncation(30))
    assert est.lam < 1
    assert abs(est.lam - BASELINES["lambda"]["sl2"]["30"]) <= BASELINES["tolerance"]
    assert est.converged and est.residual <= 1e-5


def test_too_large():
    with pytest.raises(TruncationTooLarge):
        enumerate_characters(SolenoidSpec(3, 1), Truncation(100), cap=1000)


def test_no_convergence_reports_estimate():
    spec, gens = corpus_problem("sl2")
    with pytest.raises(NoConvergence) as info:
        estimate_top(spec, gens, Truncation(20), max_iters=3)
    assert not info.value.estimate.converged


def test_enumeration_order_with_denominators():
    spec = SolenoidSpec(1, 2)
    chars = enumerate_characters(spec, Truncation(2, 1))
    # stored as chi * 2: exponent 0 first (heights 1, 2), then the new halves
    assert [int(c[0]) for c in chars] == [-2, 2, -4, 4, -1, 1]


def dense_oracle(spec, gens, trunc):
    """Averaging operator assembled directly from the exact dual action and pairing."""
    op = build_operator(spec, gens, trunc)
    chars = [op.character(i) for i in range(op.size)]
    index = {c: i for i, c in enumerate(chars)}
    n, m = len(chars), len(gens)
    A = np.zeros((n, n), dtype=complex)
    for g in gens:
        for i, chi in enumerate(chars):
            j = index.get(dual_apply(g, chi))
            if j is not None:
                v = np.exp(2j * np.pi * float(pairing_phase(chi, g.translation, spec)))
                A[i, j] += v
                A[j, i] += np.conj(v)
    return A / (2 * m), op


CASES = [
    (1, 2, [gen([[2, 1], [1, 1]], [F(1, 3), 0])]),
    (1, 2, [gen([[0, -1], [1, 0]], [0, F(1, 5)]), gen([[1, 1], [0, 1]])]),
    (2, 1, [gen([[2]], [F(1, 3)])]),
    (6, 2, [gen([[2, 0], [0, 3]], [F(1, 7), 0]), gen([[1, 1], [0, 1]])]),
]


@pytest.mark.parametrize("a,d,gens", CASES)
def test_operator_matches_dense_oracle_and_eigensolver(a, d, gens):
    spec, gens = problem(a, d, gens)
    trunc = Truncation(6 if d == 2 else 20, 1 if a > 1 else 0)
    A, op = dense_oracle(spec, gens, trunc)
    M = op.matrix().toarray()
    assert np.allclose(M, A)
    assert np.array_equal(M, M.conj().T)
    top = np.linalg.eigvalsh(A)[-1]
    est = estimate_top(spec, gens, trunc, tol=1e-7, max_iters=200000)
    assert est.lam == pytest.approx(top, abs=1e-5)


@pytest.mark.parametrize("a,d,gens", CASES)
def test_unitarity_inside_truncation(a, d, gens):
    spec, gens = problem(a, d, gens)
    op = build_operator(spec, gens, Truncation(5, 1 if a > 1 else 0))
    for k, g in enumerate(gens):
        img = op.images[k]
        hit = img[img >= 0]
        assert len(set(hit.tolist())) == len(hit)
        gi = affine_inverse(g, spec)
        for i in np.nonzero(img >= 0)[0][:50]:
            chi = op.character(i)
            back = dual_apply(gi, dual_apply(g, chi))
            assert back == chi
            # the phase of g at chi times the phase of g^-1 at its image is 1
            p = pairing_phase(chi, g.translation, spec) + pairing_phase(dual_apply(g, chi), gi.translation, spec)
            assert p % 1 == 0
        assert np.allclose(np.abs(np.exp(2j * np.pi * op.phases[k])), 1.0)


def test_compression_monotone():
    spec, gens = corpus_problem("sl2")
    lams = [est.lam for _, est in gap_curve(spec, gens, [Truncation(h) for h in (5, 10, 20)])]
    assert all(x <= y + 1e-5 for x, y in zip(lams, lams[1:]))


def test_translations_do_not_raise_lambda():
    rng = random.Random(9)
    for name in ("hyperbolic", "sl2"):
        spec, gens = corpus_problem(name)
        base = estimate_top(spec, gens, Truncation(20)).lam
        moved = [gen(g.matrix.entries, random_translation(rng, spec.d)) for g in gens]
        spec2, moved = problem(spec.a, spec.d, moved)
        assert estimate_top(spec2, moved, Truncation(20)).lam <= base + 1e-5


def test_csv_columns():
    spec, gens = corpus_problem("hyperbolic")
    rows = gap_curve(spec, gens, [Truncation(5)])
    lines = curve_csv(spec, rows).splitlines()
    assert lines[0] == "a,d,H,K,lambda,iterations,residual"
    assert len(lines) == 2 and lines[1].startswith("1,2,5,0,")


def test_deterministic():
    spec, gens = corpus_problem("sl2")
    a = estimate_top(spec, gens, Truncation(15))
    b = estimate_top(spec, gens, Truncation(15))
    assert a.lam == b.lam and a.iterations == b.iterations and a.generators_hash == b.generators_hash


def test_symmetric_start_does_not_hide_top_eigenvalue():
    import scipy.sparse.linalg as sla

    spec, gens = problem(1, 2, [gen([[0, -1], [1, 0]], [0, F(5, 12)]), gen([[1, 1], [0, 1]], [F(1, 2), 0])])
    trunc = Truncation(20)
    top = sla.eigsh(build_operator(spec, gens, trunc).matrix(), k=1, which="LA")[0][0]
    assert estimate_top(spec, gens, trunc).lam == pytest.approx(top, abs=1e-6)
