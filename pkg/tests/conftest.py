from __future__ import annotations

from fractions import Fraction

import pytest

from solgap.linalg import Matrix
from solgap.solenoid import AffineGen, SolenoidSpec, validate

S = [[0, -1], [1, 0]]
T = [[1, 1], [0, 1]]
HYP = [[2, 1], [1, 1]]


def gen(matrix, translation=None) -> AffineGen:
    m = Matrix(matrix)
    t = translation if translation is not None else [0] * m.rows
    return AffineGen(m, tuple(Fraction(x) for x in t))


def problem(a: int, d: int, gens):
    spec = SolenoidSpec(d, a)
    return spec, validate(spec, gens)


@pytest.fixture
def sl2():
    return problem(1, 2, [gen(S), gen(T)])


@pytest.fixture
def hyperbolic():
    return problem(1, 2, [gen(HYP)])


HEIS_X = [[1, 1, 0], [0, 1, 0], [0, 0, 1]]
HEIS_Y = [[1, 0, 0], [0, 1, 1], [0, 0, 1]]
HYP_BLOCK = [[2, 1, 0], [1, 1, 0], [0, 0, 1]]

# name -> (a, d, generators, expected gap tag, expected ergodic tag, witness dimension or None)
CORPUS = {
    "hyperbolic": (1, 2, [gen(HYP)], "NoGap", "Ergodic", 2),
    "sl2": (1, 2, [gen(S), gen(T)], "Gap", "Ergodic", None),
    "rotation_third": (1, 1, [gen([[1]], [Fraction(1, 3)])], "NoGap", "NotErgodic", 1),
    "negation": (1, 1, [gen([[-1]])], "NoGap", "NotErgodic", 1),
    "times2": (2, 1, [gen([[2]])], "NoGap", "Ergodic", 1),
    "times2_times3": (6, 1, [gen([[2]]), gen([[3]])], "NoGap", "Ergodic", 1),
    "heisenberg": (1, 3, [gen(HEIS_X), gen(HEIS_Y)], "NoGap", "NotErgodic", 1),
    "hyperbolic_block": (1, 3, [gen(HYP_BLOCK)], "NoGap", "NotErgodic", 1),
    "trivial": (1, 1, [], "NoGap", "NotErgodic", 1),
}


def corpus_problem(name):
    a, d, gens, *_ = CORPUS[name]
    return problem(a, d, gens)


def random_unit_matrix(rng, d, a, height=5, tries=20000):
    """Random matrix in GL_d(Z[1/a]) with integer entries of absolute value <= height."""
    for _ in range(tries):
        m = Matrix([[rng.randint(-height, height) for _ in range(d)] for _ in range(d)])
        det = m.det()
        if det == 0:
            continue
        n = abs(det.numerator)
        for p in SolenoidSpec(d, a).primes:
            while n % p == 0:
                n //= p
        if n == 1:
            return m
    raise RuntimeError("no unit matrix found")


def random_translation(rng, d):
    return tuple(Fraction(rng.randint(0, 11), rng.choice([1, 2, 3, 4, 5, 6, 7, 12])) for _ in range(d))


def random_instance(rng, max_d=3, a_values=(1, 2, 3, 6), max_gens=2, translations=True):
    d = rng.randint(1, max_d)
    a = rng.choice(a_values)
    gens = []
    for _ in range(rng.randint(1, max_gens)):
        m = random_unit_matrix(rng, d, a)
        t = random_translation(rng, d) if translations and rng.random() < 0.5 else (0,) * d
        gens.append(AffineGen(m, tuple(Fraction(x) for x in t)))
    return problem(a, d, gens)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
