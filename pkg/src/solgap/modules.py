"""Invariant subspaces of Q^d under a finite set of rational matrices.

Irreducibility is decided Meataxe-style: probe elements of the generated
algebra, spin kernel vectors of irreducible factors of their characteristic
polynomials, and accept a Norton certificate when a kernel of minimal nullity
spins to the whole space on both sides.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .linalg import (
    EchelonSpan,
    Matrix,
    RatPoly,
    Vector,
    charpoly,
    factor_poly,
    format_rational,
    kernel,
    parse_rational,
    row_basis,
)


class DimensionMismatch(ValueError):
    pass


class NotInvariant(ValueError):
    pass


class MeataxeFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class Submodule:
    """Subspace of Q^d with a reduced echelon basis."""

    ambient_dim: int
    basis: tuple[Vector, ...]

    @classmethod
    def span(cls, vectors: Sequence[Sequence[Fraction]], dim: int) -> "Submodule":
        return cls(dim, tuple(row_basis(vectors, dim)))

    @classmethod
    def whole(cls, dim: int) -> "Submodule":
        return cls(dim, tuple(Matrix.identity(dim).row(i) for i in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> list[int]:
        return [next(i for i, x in enumerate(b) if x != 0) for b in self.basis]

    def reduce(self, v: Sequence[Fraction]) -> list[Fraction]:
        w = list(v)
        for b, p in zip(self.basis, self.pivots):
            c = w[p]
            if c:
                w = [x - c * y for x, y in zip(w, b)]
        return w

    def contains(self, v: Sequence[Fraction]) -> bool:
        return not any(self.reduce(v))

    def contains_space(self, other: "Submodule") -> bool:
        return all(self.contains(v) for v in other.basis)

    def coordinates(self, v: Sequence[Fraction]) -> Vector:
        coords = tuple(v[p] for p in self.pivots)
        rest = list(v)
        for c, b in zip(coords, self.basis):
            if c:
                rest = [x - c * y for x, y in zip(rest, b)]
        if any(rest):
            raise NotInvariant("vector outside the subspace")
        return coords

    def basis_matrix(self) -> Matrix:
        """d x k matrix whose columns are the basis vectors."""
        return Matrix.from_columns(self.basis, self.ambient_dim)

    def annihilator(self) -> "Submodule":
        """Orthogonal complement under the standard pairing."""
        if not self.basis:
            return Submodule.whole(self.ambient_dim)
        return Submodule.span(kernel(Matrix(self.basis, self.ambient_dim)), self.ambient_dim)

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "basis": [[format_rational(x) for x in b] for b in self.basis]}

    @classmethod
    def from_json(cls, data: dict) -> "Submodule":
        dim = int(data["ambient_dim"])
        vecs = [[parse_rational(x) for x in b] for b in data["basis"]]
        if any(len(v) != dim for v in vecs):
            raise DimensionMismatch("basis vector length differs from ambient dimension")
        return cls.span(vecs, dim)


@dataclass(frozen=True)
class ActionOnSubmodule:
    submodule: Submodule
    restricted_gens: tuple[Matrix, ...]

    def consistent_with(self, gens: Sequence[Matrix]) -> bool:
        B = self.submodule.basis_matrix()
        return all(g @ B == B @ r for g, r in zip(gens, self.restricted_gens))


def _check(gens: Sequence[Matrix], dim: int | None = None) -> int:
    sizes = {g.shape for g in gens}
    if dim is not None:
        sizes.add((dim, dim))
    if len(sizes) > 1 or any(r != c for r, c in sizes):
        raise DimensionMismatch("generators must be square of one size")
    return next(iter(sizes))[0] if sizes else 0


def spin(seed: Sequence[Sequence[Fraction]], gens: Sequence[Matrix], dim: int | None = None) -> Submodule:
    """Smallest subspace containing ``seed`` and invariant under every generator."""
    if dim is None:
        if gens:
            dim = gens[0].rows
        elif seed:
            dim = len(seed[0])
        else:
            raise DimensionMismatch("cannot infer the dimension")
    _check(gens, dim)
    if any(len(v) != dim for v in seed):
        raise DimensionMismatch("seed vector has the wrong length")
    span = EchelonSpan(dim)
    queue = []
    for v in seed:
        if span.add(v):
            queue.append(tuple(v))
    while queue and len(span) < dim:
        v = queue.pop()
        for g in gens:
            w = g.apply(v)
            if span.add(w):
                queue.append(w)
    return Submodule.span(span.basis(), dim)


def restrict(gens: Sequence[Matrix], W: Submodule) -> ActionOnSubmodule:
    restricted = []
    for g in gens:
        if g.shape != (W.ambient_dim, W.ambient_dim):
            raise DimensionMismatch("generator size differs from ambient dimension")
        cols = [W.coordinates(g.apply(b)) for b in W.basis]
        restricted.append(Matrix.from_columns(cols, W.dim))
    return ActionOnSubmodule(W, tuple(restricted))


def quotient_action(gens: Sequence[Matrix], W: Submodule) -> tuple[list[int], list[Matrix]]:
    """Action on V/W in the basis of standard vectors at the non-pivot columns of W."""
    d = W.ambient_dim
    piv = set(W.pivots)
    free = [j for j in range(d) if j not in piv]
    mats = []
    for g in gens:
        cols = []
        for j in free:
            w = W.reduce(g.column(j))
            cols.append(tuple(w[k] for k in free))
        mats.append(Matrix.from_columns(cols, len(free)))
    return free, mats


# ---------------------------------------------------------------------------
# irreducibility


@dataclass(frozen=True)
class NortonCertificate:
    """An algebra element whose ``factor``-kernel has minimal nullity and spins both ways.

    ``word`` is a recipe for the element: a list of (coefficient, generator
    index sequence) pairs; the element is the sum of coefficient times the
    product of generators in that order.
    """

    word: tuple[tuple[Fraction, tuple[int, ...]], ...]
    factor: RatPoly
    vector: Vector
    dual_vector: Vector

    def element(self, gens: Sequence[Matrix]) -> Matrix:
        return evaluate_word(self.word, gens)

    def check(self, gens: Sequence[Matrix]) -> bool:
        d = gens[0].rows
        theta = self.element(gens)
        if factor_poly(self.factor) != [(self.factor.monic(), 1)]:
            return False
        F = self.factor(theta)
        if len(kernel(F)) != self.factor.degree:
            return False
        if any(F.apply(self.vector)) or any(F.T.apply(self.dual_vector)):
            return False
        if spin([self.vector], gens).dim != d:
            return False
        return spin([self.dual_vector], [g.T for g in gens]).dim == d

    def to_json(self) -> dict:
        return {
            "word": [[format_rational(c), list(w)] for c, w in self.word],
            "factor": self.factor.to_json(),
            "vector": [format_rational(x) for x in self.vector],
            "dual_vector": [format_rational(x) for x in self.dual_vector],
        }

    @classmethod
    def from_json(cls, data: dict) -> "NortonCertificate":
        return cls(
            tuple((parse_rational(c), tuple(int(i) for i in w)) for c, w in data["word"]),
            RatPoly.from_json(data["factor"]),
            tuple(parse_rational(x) for x in data["vector"]),
            tuple(parse_rational(x) for x in data["dual_vector"]),
        )


def evaluate_word(word, gens: Sequence[Matrix]) -> Matrix:
    d = gens[0].rows
    total = Matrix.zeros(d, d)
    for c, seq in word:
        m = Matrix.identity(d)
        for i in seq:
            m = m @ gens[i]
        total = total + m.scale(c)
    return total


def _probe_elements(ngens: int, seed: int, limit: int):
    """Deterministic stream of algebra-element recipes."""
    words: list[tuple[int, ...]] = [(i,) for i in range(ngens)]
    words += [(i, j) for i in range(ngens) for j in range(ngens)]
    words += [(i, j, k) for i in range(ngens) for j in range(ngens) for k in range(ngens)]
    for w in words[:ngens]:
        yield ((Fraction(1), w),)
    rng = random.Random(seed)
    for _ in range(limit):
        size = rng.randint(2, min(5, len(words) + 1))
        picks = rng.sample(range(-1, len(words)), min(size, len(words) + 1))
        recipe = []
        for p in picks:
            c = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]))
            recipe.append((c, () if p < 0 else words[p]))
        yield tuple(recipe)


def is_irreducible(
    gens: Sequence[Matrix], seed: int = 0, max_probes: int = 400
) -> tuple[bool, NortonCertificate | Submodule]:
    """Decide irreducibility of Q^d; returns a Norton certificate or an invariant subspace."""
    d = _check(gens)
    if not gens:
        raise DimensionMismatch("need at least one generator")
    if d == 1:
        one = (Fraction(1),)
        return True, NortonCertificate(((Fraction(1), ()),), RatPoly([-1, 1]), one, one)
    gens_t = [g.T for g in gens]
    for recipe in _probe_elements(len(gens), seed, max_probes):
        theta = evaluate_word(recipe, gens)
        for f, _ in factor_poly(charpoly(theta)):
            F = f(theta)
            K = kernel(F)
            for v in K:
                S = spin([v], gens)
                if S.dim < d:
                    return False, S
            if len(K) != f.degree:
                continue
            w = kernel(F.T)[0]
            Sd = spin([w], gens_t)
            if Sd.dim < d:
                return False, Sd.annihilator()
            return True, NortonCertificate(recipe, f, K[0], w)
    raise MeataxeFailure("no irreducibility certificate found")


# ---------------------------------------------------------------------------
# simple submodules and socle classes


def _find_simple(gens: Sequence[Matrix], dim: int, seed: int) -> tuple[list[Vector], list[Matrix]]:
    """A simple submodule of Q^dim: its basis and the restricted action."""
    basis = [Matrix.identity(dim).row(i) for i in range(dim)]
    mats = list(gens)
    while True:
        if dim == 1 or not mats:
            if not mats and dim > 1:
                line = [basis[0]]
                return line, []
            return basis, mats
        ok, witness = is_irreducible(mats, seed)
        if ok:
            return basis, mats
        sub = restrict(mats, witness)
        basis = [_combine(basis, v) for v in witness.basis]
        mats = list(sub.restricted_gens)
        dim = witness.dim


def _combine(basis: Sequence[Vector], coords: Sequence[Fraction]) -> Vector:
    out = [Fraction(0)] * len(basis[0])
    for c, b in zip(coords, basis):
        if c:
            out = [x + c * y for x, y in zip(out, b)]
    return tuple(out)


def hom_space(src: Sequence[Matrix], dst: Sequence[Matrix]) -> list[Matrix]:
    """Basis of {X : dst_g X = X src_g for all g}, X of shape dim(dst) x dim(src)."""
    s = src[0].rows if src else 0
    t = dst[0].rows if dst else 0
    n = s * t
    rows = []
    for A, B in zip(dst, src):
        # (A X - X B)[i][j] = sum_k A[i][k] X[k][j] - sum_k X[i][k] B[k][j]
        for i in range(t):
            for j in range(s):
                row = [Fraction(0)] * n
                for k in range(t):
                    if A[i, k]:
                        row[k * s + j] += A[i, k]
                for k in range(s):
                    if B[k, j]:
                        row[i * s + k] -= B[k, j]
                if any(row):
                    rows.append(row)
    if not rows:
        sols = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    else:
        sols = kernel(Matrix(rows, n))
    return [Matrix([v[i * s:(i + 1) * s] for i in range(t)], s) for v in sols]


def simple_submodule_reps(gens: Sequence[Matrix], seed: int = 0) -> list[ActionOnSubmodule]:
    """One simple submodule per isomorphism class in the socle of Q^d."""
    d = _check(gens)
    if d == 0:
        return []
    classes = _socle_classes(list(gens), d, seed)
    reps = []
    for basis in classes:
        W = Submodule.span(basis, d)
        reps.append(restrict(gens, W))
    reps.sort(key=lambda r: (r.submodule.dim, r.submodule.basis))
    return reps


def _socle_classes(gens: list[Matrix], d: int, seed: int) -> list[list[Vector]]:
    """Bases (in Q^d) of one simple submodule per socle class."""
    if not gens:
        gens = [Matrix.identity(d)]
    basis, action = _find_simple(gens, d, seed)
    action = action or [Matrix.identity(len(basis)) for _ in gens]
    homs = hom_space(action, gens)
    iso = EchelonSpan(d)
    for X in homs:
        for col in X.columns():
            iso.add(col)
    I = Submodule.span(iso.basis(), d)
    found = [(basis, action)]
    if I.dim < d:
        free, qmats = quotient_action(gens, I)
        for qbasis in _socle_classes(qmats, len(free), seed):
            W = Submodule.span(qbasis, len(free))
            rho = list(restrict(qmats, W).restricted_gens)
            if any(hom_space(rho, fa) for _, fa in found):
                continue
            into_v = hom_space(rho, gens)
            if not into_v:
                continue
            X = into_v[0]
            image = row_basis(X.columns(), d)
            sub = Submodule.span(image, d)
            found.append((list(sub.basis), list(restrict(gens, sub).restricted_gens)))
    return [b for b, _ in found]
