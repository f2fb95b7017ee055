"""The a-adic solenoid S_a^d: affine generators, the dual action and the character pairing.

Characters are vectors in Z[1/a]^d; an automorphism acts on them by its
transpose.  Translations are rational points q in Q^d (embedded diagonally)
kept in a canonical form: the Z[1/a]-part is removed coordinatewise and the
rest reduced into [0, 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Any, Sequence

from sympy.ntheory import factorint

from .linalg import Matrix, Vector, format_rational, integer_hnf, parse_rational, saturate_lattice
from .modules import Submodule


class InputError(ValueError):
    """Malformed problem description; the message names the offending field."""


class NotAUnit(InputError):
    pass


class BadDenominator(InputError):
    pass


class NotSquareFree(InputError):
    pass


@dataclass(frozen=True)
class SolenoidSpec:
    d: int
    a: int = 1

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise InputError("d: dimension must be a positive integer")
        if not isinstance(self.a, int) or self.a < 1:
            raise InputError("a: must be a positive integer")
        if any(e > 1 for e in factorint(self.a).values()):
            raise NotSquareFree(f"a: {self.a} is not square-free")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(sorted(factorint(self.a)))

    def to_json(self) -> dict:
        return {"a": self.a, "d": self.d}


@dataclass(frozen=True)
class AffineGen:
    matrix: Matrix
    translation: Vector

    def to_json(self) -> dict:
        return {"matrix": self.matrix.to_json(), "translation": [format_rational(x) for x in self.translation]}


Character = Vector


def _a_part(n: int, primes: Sequence[int]) -> int:
    """Largest divisor of n supported on ``primes``."""
    n = abs(n)
    part = 1
    for p in primes:
        while n % p == 0:
            n //= p
            part *= p
    return part


def in_ring(x: Fraction, spec: SolenoidSpec) -> bool:
    """x lies in Z[1/a]."""
    return _a_part(x.denominator, spec.primes) == x.denominator


def is_unit(x: Fraction, spec: SolenoidSpec) -> bool:
    if x == 0:
        return False
    return _a_part(x.numerator, spec.primes) == abs(x.numerator) and in_ring(x, spec)


def canonical_scalar(x: Fraction, spec: SolenoidSpec) -> Fraction:
    """Representative of x modulo Z[1/a] with denominator coprime to a, in [0, 1)."""
    den = x.denominator
    A = _a_part(den, spec.primes)
    m = den // A
    if m == 1:
        return Fraction(0)
    # u/(A m) = s/A + r/m, so r = u * A^-1 mod m
    r = (x.numerator * pow(A, -1, m)) % m
    return Fraction(r, m)


def canonical_translation(q: Sequence[Fraction], spec: SolenoidSpec) -> Vector:
    return tuple(canonical_scalar(Fraction(x), spec) for x in q)


def validate(spec: SolenoidSpec, gens: Sequence[AffineGen]) -> list[AffineGen]:
    """Check membership in GL_d(Z[1/a]) and canonicalize the translations."""
    out = []
    for i, g in enumerate(gens):
        if g.matrix.shape != (spec.d, spec.d):
            raise InputError(f"generators[{i}].matrix: expected {spec.d}x{spec.d}")
        if len(g.translation) != spec.d:
            raise InputError(f"generators[{i}].translation: expected length {spec.d}")
        for row in g.matrix.entries:
            for x in row:
                if not in_ring(x, spec):
                    raise BadDenominator(f"generators[{i}].matrix: entry {format_rational(x)} has a denominator prime outside a")
        if not is_unit(g.matrix.det(), spec):
            raise NotAUnit(f"generators[{i}].matrix: determinant {format_rational(g.matrix.det())} is not a unit of Z[1/{spec.a}]")
        out.append(AffineGen(g.matrix, canonical_translation(g.translation, spec)))
    return out


def dual_apply(g: AffineGen, chi: Sequence[Fraction]) -> Character:
    return g.matrix.T.apply(chi)


def padic_fractional_part(t: Fraction, p: int) -> Fraction:
    """{t}_p: the p-power-denominator part of t, in [0, 1)."""
    den = t.denominator
    k = 0
    while den % p == 0:
        den //= p
        k += 1
    if k == 0:
        return Fraction(0)
    pk = p ** k
    return Fraction((t.numerator * pow(den, -1, pk)) % pk, pk)


def pairing_phase(chi: Sequence[Fraction], q: Sequence[Fraction], spec: SolenoidSpec) -> Fraction:
    """Angle in [0, 1) of the character chi at the diagonal rational point q."""
    t = sum((Fraction(c) * Fraction(x) for c, x in zip(chi, q)), Fraction(0))
    for p in spec.primes:
        t -= padic_fractional_part(t, p)
    return t - floor(t)


def identity_gen(spec: SolenoidSpec) -> AffineGen:
    return AffineGen(Matrix.identity(spec.d), (Fraction(0),) * spec.d)


def affine_compose(g: AffineGen, h: AffineGen, spec: SolenoidSpec) -> AffineGen:
    """The map x -> g(h(x))."""
    shifted = g.matrix.apply(h.translation)
    trans = [x + y for x, y in zip(g.translation, shifted)]
    return AffineGen(g.matrix @ h.matrix, canonical_translation(trans, spec))


def affine_inverse(g: AffineGen, spec: SolenoidSpec) -> AffineGen:
    inv = g.matrix.inverse()
    return AffineGen(inv, canonical_translation([-x for x in inv.apply(g.translation)], spec))


def annihilator_lattice(W: Submodule, spec: SolenoidSpec) -> list[Character]:
    """A Z[1/a]-basis of W intersected with Z[1/a]^d."""
    if W.dim == 0:
        return []
    basis = saturate_lattice(W.basis, W.ambient_dim)
    return [tuple(Fraction(x) for x in v) for v in integer_hnf(basis)]


# ---------------------------------------------------------------------------
# JSON input


def _rational(value: Any, where: str) -> Fraction:
    try:
        if isinstance(value, bool):
            raise ValueError
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            return parse_rational(value)
    except (ValueError, ZeroDivisionError):
        pass
    raise InputError(f"{where}: expected a rational string 'p/q', got {value!r}")


def parse_problem(data: Any) -> tuple[SolenoidSpec, list[AffineGen]]:
    if not isinstance(data, dict):
        raise InputError("input: expected a JSON object")
    for key in ("a", "d", "generators"):
        if key not in data:
            raise InputError(f"{key}: missing field")
    a, d = data["a"], data["d"]
    if not isinstance(a, int) or isinstance(a, bool):
        raise InputError("a: expected an integer")
    if not isinstance(d, int) or isinstance(d, bool):
        raise InputError("d: expected an integer")
    spec = SolenoidSpec(d, a)
    raw = data["generators"]
    if not isinstance(raw, list):
        raise InputError("generators: expected a list")
    gens = []
    for i, g in enumerate(raw):
        if not isinstance(g, dict) or "matrix" not in g:
            raise InputError(f"generators[{i}].matrix: missing field")
        m = g["matrix"]
        if not isinstance(m, list) or len(m) != d or any(not isinstance(r, list) or len(r) != d for r in m):
            raise InputError(f"generators[{i}].matrix: expected {d}x{d}")
        matrix = Matrix([[_rational(x, f"generators[{i}].matrix") for x in r] for r in m])
        t = g.get("translation", ["0"] * d)
        if not isinstance(t, list) or len(t) != d:
            raise InputError(f"generators[{i}].translation: expected length {d}")
        trans = tuple(_rational(x, f"generators[{i}].translation") for x in t)
        gens.append(AffineGen(matrix, trans))
    return spec, validate(spec, gens)


def problem_to_json(spec: SolenoidSpec, gens: Sequence[AffineGen]) -> dict:
    return {"a": spec.a, "d": spec.d, "generators": [g.to_json() for g in gens]}


def load_problem(path: str) -> tuple[SolenoidSpec, list[AffineGen]]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"input: cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"input: malformed JSON ({exc.msg} at line {exc.lineno})") from exc
    return parse_problem(data)
