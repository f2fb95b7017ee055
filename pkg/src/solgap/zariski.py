"""Lie algebras of Zariski closures of rational matrix groups, and group classification.

Two exact devices complement the Lie algebra computation:

* the *envelope* of a group: the smallest space stable under conjugation by the
  generators that contains Q[s^N] and log(u) for the Jordan parts of sample
  words.  It lies inside span(G0) + Lie(G0), so if it is noncommutative the
  identity component G0 is nonabelian and the group is not virtually abelian.
* the *congruence certificate*: for an odd prime p not dividing any
  denominator, the kernel of reduction mod p is torsion free and of finite
  index.  If its Schreier generators commute, the group is virtually abelian;
  if they are all trivial, the group is finite of the enumerated order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import sympy
from sympy.polys.matrices import DomainMatrix

from .linalg import (
    EchelonSpan,
    Matrix,
    RatPoly,
    charpoly,
    factor_poly,
    kernel,
    lcm,
    minpoly,
    squarefree_part,
)
from .numberfield import (
    AlgebraicNumber,
    QuadraticNumber,
    common_quadratic_field,
    cyclotomic_order,
    galois_stable_relations,
    mult_relation_lattice,
    roots_of,
)


class Singular(ValueError):
    pass


DEFAULT_ENUMERATION_BOUND = 10 ** 5


# ---------------------------------------------------------------------------
# Lie algebras


@dataclass
class LieAlgebra:
    ambient_dim: int
    basis: list[Matrix]
    complete: bool = True

    @classmethod
    def spanned_by(cls, n: int, mats: Sequence[Matrix], complete: bool = True) -> "LieAlgebra":
        span = EchelonSpan(n * n)
        for m in mats:
            span.add(m.flat())
        return cls(n, [Matrix.from_flat(v, n) for v in span.basis()], complete)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _span(self) -> EchelonSpan:
        return EchelonSpan(self.ambient_dim ** 2, [b.flat() for b in self.basis])

    def contains(self, X: Matrix) -> bool:
        return self._span().contains(X.flat())

    def contains_algebra(self, other: "LieAlgebra") -> bool:
        span = self._span()
        return all(span.contains(b.flat()) for b in other.basis)

    def same_space(self, other: "LieAlgebra") -> bool:
        return self.dim == other.dim and self.contains_algebra(other)

    def is_abelian(self) -> bool:
        return all(x.commutator(y).is_zero() for x, y in itertools.combinations(self.basis, 2))

    def is_bracket_closed(self) -> bool:
        span = self._span()
        return all(span.contains(x.commutator(y).flat()) for x, y in itertools.combinations(self.basis, 2))

    def is_ad_invariant(self, gens: Sequence[Matrix]) -> bool:
        span = self._span()
        return all(span.contains((g @ X @ g.inverse()).flat()) for g in gens for X in self.basis)

    def derived(self) -> "LieAlgebra":
        brackets = [x.commutator(y) for x, y in itertools.combinations(self.basis, 2)]
        return LieAlgebra.spanned_by(self.ambient_dim, brackets, self.complete)

    def is_solvable(self) -> bool:
        current = self
        while current.dim:
            nxt = current.derived()
            if nxt.dim == current.dim:
                return False
            current = nxt
        return True

    def conjugate(self, h: Matrix) -> "LieAlgebra":
        hi = h.inverse()
        return LieAlgebra.spanned_by(self.ambient_dim, [h @ b @ hi for b in self.basis], self.complete)

    def to_json(self) -> dict:
        return {"basis": [b.to_json() for b in self.basis], "complete": self.complete}

    @classmethod
    def from_json(cls, data: dict, n: int) -> "LieAlgebra":
        mats = [Matrix.from_json(b) for b in data["basis"]]
        if any(m.shape != (n, n) for m in mats):
            raise ValueError("Lie basis element has the wrong size")
        return cls(n, mats, bool(data.get("complete", True)))


# ---------------------------------------------------------------------------
# Jordan decomposition


def _require_invertible(g: Matrix) -> None:
    if not g.is_square or g.det() == 0:
        raise Singular("matrix is not invertible")


@lru_cache(maxsize=8192)
def jordan(g: Matrix) -> tuple[Matrix, Matrix]:
    """Multiplicative Jordan decomposition g = s u with s semisimple, u unipotent, su = us."""
    _require_invertible(g)
    P = squarefree_part(minpoly(g))
    dP = P.derivative()
    s = g
    while True:
        Ps = P(s)
        if Ps.is_zero():
            break
        s = s - Ps @ dP(s).inverse()
    return s, s.inverse() @ g


def nilpotent_log(u: Matrix) -> Matrix:
    n = u.rows
    N = u - Matrix.identity(n)
    total = Matrix.zeros(n, n)
    power = Matrix.identity(n)
    for k in range(1, n + 1):
        power = power @ N
        if power.is_zero():
            break
        total = total + power.scale(Fraction((-1) ** (k + 1), k))
    return total


# ---------------------------------------------------------------------------
# cyclic groups


def _companion(f: RatPoly) -> Matrix:
    n = f.degree
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = Fraction(1)
    for i in range(n):
        rows[i][n - 1] = -f.coeffs[i]
    return Matrix(rows, n)


def _relation_rows(lams: Sequence[AlgebraicNumber], e: Sequence[int], r: int) -> list[list[Fraction]] | None:
    """Rational linear conditions on p = sum c_j x^j (j < r) equivalent to sum e_i p(lam_i) = 0."""
    support = [i for i, k in enumerate(e) if k]
    if not support:
        return []
    D = common_quadratic_field([lams[i] for i in support])
    if D is not None:
        ra = [Fraction(0)] * r
        rb = [Fraction(0)] * r
        for i in support:
            q = lams[i].quadratic()
            base = QuadraticNumber(q.a, q.b, D) if q.b else QuadraticNumber(q.a, 0, D)
            power = QuadraticNumber(1, 0, D)
            for j in range(r):
                ra[j] += e[i] * power.a
                rb[j] += e[i] * power.b
                power = power * base
        return [ra, rb]
    if len(support) == 1:
        f = lams[support[0]].min_poly
        rows = [[Fraction(0)] * r for _ in range(f.degree)]
        xj = RatPoly([1])
        for j in range(r):
            rem = xj % f
            for k, c in enumerate(rem.coeffs):
                rows[k][j] = c
            xj = xj * RatPoly.x()
        return rows
    # constant on full conjugate sets: use power sums
    groups: dict[RatPoly, list[int]] = {}
    for i in support:
        groups.setdefault(lams[i].min_poly, []).append(i)
    row = [Fraction(0)] * r
    for f, idx in groups.items():
        coeffs = {e[i] for i in idx}
        if len(coeffs) != 1 or len({lams[i].index for i in idx}) != f.degree:
            return None
        c = coeffs.pop()
        C = _companion(f)
        power = Matrix.identity(f.degree)
        for j in range(r):
            row[j] += c * power.trace()
            power = power @ C
    return [row]


def _torus_lie(s: Matrix) -> LieAlgebra:
    """Lie algebra of the Zariski closure of <s> for semisimple s."""
    n = s.rows
    P = minpoly(s)
    r = P.degree
    lams: list[AlgebraicNumber] = []
    for f, _ in factor_poly(P):
        lams.extend(roots_of(f))
    lattice = mult_relation_lattice(lams)
    relations = lattice.basis if lattice.complete else galois_stable_relations(lams)
    rows: list[list[Fraction]] = []
    for e in relations:
        cond = _relation_rows(lams, e, r)
        if cond is not None:
            rows.extend(cond)
    if rows:
        sols = kernel(Matrix(rows, r))
    else:
        sols = [tuple(Fraction(int(i == j)) for j in range(r)) for i in range(r)]
    mats = [RatPoly(c)(s) for c in sols]
    return LieAlgebra.spanned_by(n, mats, lattice.complete)


def lie_of_cyclic(g: Matrix) -> LieAlgebra:
    """Lie algebra of the Zariski closure of the cyclic group generated by g."""
    _require_invertible(g)
    s, u = jordan(g)
    torus = _torus_lie(s)
    logu = nilpotent_log(u)
    return LieAlgebra.spanned_by(g.rows, torus.basis + [logu], torus.complete)


def _words(gens: Sequence[Matrix], length: int) -> list[Matrix]:
    out = list(gens)
    layer = list(gens)
    for _ in range(length - 1):
        layer = [w @ g for w in layer for g in gens]
        out.extend(layer)
    return out


def _saturate(n: int, start: Sequence[Matrix], gens: Sequence[Matrix], bracket: bool) -> EchelonSpan:
    span = EchelonSpan(n * n)
    queue = []
    for m in start:
        if span.add(m.flat()):
            queue.append(m)
    invs = [g.inverse() for g in gens]
    while queue:
        X = queue.pop()
        new = [g @ X @ gi for g, gi in zip(gens, invs)]
        if bracket:
            new += [X.commutator(Matrix.from_flat(b, n)) for b in span.basis()]
        for Y in new:
            if span.add(Y.flat()):
                queue.append(Y)
    return span


def lie_closure(gens: Sequence[Matrix], word_length: int = 2) -> LieAlgebra:
    """Smallest Lie algebra containing the cyclic contributions, closed under brackets and Ad(gens).

    Besides the generators, every word of length at most ``word_length``
    contributes its cyclic Lie algebra; this catches groups generated by
    elements of finite order.
    """
    if not gens:
        raise ValueError("need at least one generator")
    for g in gens:
        _require_invertible(g)
    n = gens[0].rows
    start: list[Matrix] = []
    complete = True
    seen = set()
    for w in _words(gens, word_length):
        if w in seen:
            continue
        seen.add(w)
        L = lie_of_cyclic(w)
        complete = complete and L.complete
        start.extend(L.basis)
    span = _saturate(n, start, gens, bracket=True)
    return LieAlgebra(n, [Matrix.from_flat(v, n) for v in span.basis()], complete)


# ---------------------------------------------------------------------------
# envelope: an exact witness against virtual abelianness


def ratio_torsion_exponent(s: Matrix) -> int:
    """lcm of the orders of eigenvalue ratios of s that are roots of unity."""
    P = squarefree_part(minpoly(s))
    C = _companion(P)
    Ci = C.inverse()
    r = P.degree
    kron = [[C[i // r, j // r] * Ci[i % r, j % r] for j in range(r * r)] for i in range(r * r)]
    dm = DomainMatrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in kron], (r * r, r * r), sympy.QQ)
    coeffs = [Fraction(int(c.numerator), int(c.denominator)) for c in reversed(dm.charpoly())]
    N = 1
    for f, _ in factor_poly(RatPoly(coeffs)):
        k = cyclotomic_order(f)
        if k is not None:
            N = lcm(N, k)
    return N


@lru_cache(maxsize=8192)
def _power_algebra(s: Matrix) -> tuple[Matrix, ...]:
    t = s ** ratio_torsion_exponent(s)
    k = minpoly(t).degree
    out = [Matrix.identity(s.rows)]
    for _ in range(k - 1):
        out.append(out[-1] @ t)
    return tuple(out)


@dataclass
class Envelope:
    basis: list[Matrix]
    witness: tuple[Matrix, Matrix] | None

    @property
    def commutative(self) -> bool:
        return self.witness is None


def envelope(gens: Sequence[Matrix], words: Sequence[Matrix] | None = None) -> Envelope:
    n = gens[0].rows
    if words is None:
        words = _sample_words(gens)
    start: list[Matrix] = []
    for w in words:
        s, u = jordan(w)
        start.extend(_power_algebra(s))
        logu = nilpotent_log(u)
        if not logu.is_zero():
            start.append(logu)
    span = _saturate(n, start, gens, bracket=False)
    basis = [Matrix.from_flat(v, n) for v in span.basis()]
    for x, y in itertools.combinations(basis, 2):
        if not x.commutator(y).is_zero():
            return Envelope(basis, (x, y))
    return Envelope(basis, None)


def _sample_words(gens: Sequence[Matrix]) -> list[Matrix]:
    invs = [g.inverse() for g in gens]
    letters = list(gens) + invs
    out = []
    seen = set()
    for w in list(gens) + [a @ b for a in letters for b in letters] + [a @ b @ c for a in gens for b in letters for c in letters]:
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


# ---------------------------------------------------------------------------
# congruence certificate


def _denominator_primes(mats: Sequence[Matrix]) -> set[int]:
    primes: set[int] = set()
    for m in mats:
        for row in m.entries:
            for x in row:
                if x.denominator != 1:
                    primes.update(sympy.factorint(x.denominator))
    return primes


def admissible_primes(gens: Sequence[Matrix], count: int = 2) -> list[int]:
    bad = _denominator_primes(list(gens) + [g.inverse() for g in gens])
    out = []
    p = 3
    while len(out) < count:
        if p not in bad:
            out.append(p)
        p = int(sympy.nextprime(p))
    return out


def _reduce(m: Matrix, p: int) -> tuple[int, ...]:
    return tuple((x.numerator * pow(x.denominator, -1, p)) % p for row in m.entries for x in row)


@dataclass
class CongruenceResult:
    prime: int
    image_order: int | None
    kernel_basis: list[Matrix] = field(default_factory=list)
    abelian: bool | None = None
    trivial: bool | None = None
    elements: list[Matrix] = field(default_factory=list)


def congruence_certificate(gens: Sequence[Matrix], p: int, bound: int) -> CongruenceResult:
    """Enumerate the image mod p and test the Schreier generators of the kernel.

    Stops early with ``abelian = False`` at the first non-commuting pair and
    returns ``image_order = None`` when the image exceeds ``bound``.
    """
    n = gens[0].rows
    ident = Matrix.identity(n)
    invs = [g.inverse() for g in gens]
    key0 = _reduce(ident, p)
    trans = {key0: (ident, ident)}
    order = [key0]
    span = EchelonSpan(n * n)
    basis: list[Matrix] = []
    abelian = True
    trivial = True
    i = 0
    while i < len(order):
        key = order[i]
        t, ti = trans[key]
        for g, gi in zip(gens, invs):
            w = t @ g
            k2 = _reduce(w, p)
            if k2 not in trans:
                if len(trans) >= bound:
                    return CongruenceResult(p, None)
                trans[k2] = (w, gi @ ti)
                order.append(k2)
                continue
            h = w @ trans[k2][1]
            if h.is_identity():
                continue
            trivial = False
            if span.add(h.flat()):
                if abelian and any(not h.commutator(b).is_zero() for b in basis):
                    abelian = False
                basis.append(h)
        i += 1
    result = CongruenceResult(p, len(order), basis, abelian, trivial)
    if trivial:
        result.elements = [trans[k][0] for k in order]
    return result


def has_infinite_order(g: Matrix) -> bool:
    """Exact test: g has infinite order unless it is semisimple with root-of-unity eigenvalues."""
    s, u = jordan(g)
    if not u.is_identity():
        return True
    return any(cyclotomic_order(f) is None for f, _ in factor_poly(minpoly(s)))


# ---------------------------------------------------------------------------
# classification


TAGS = ("Finite", "VirtuallyAbelian", "VirtuallySolvable", "NonSolvable", "Undecided")


@dataclass
class GroupClass:
    tag: str
    order: int | None = None
    reason: str = ""
    virtually_abelian: bool | None = None
    finite: bool | None = None
    lie: LieAlgebra | None = None
    congruence: CongruenceResult | None = None
    envelope_witness: tuple[Matrix, Matrix] | None = None

    def __str__(self) -> str:
        if self.tag == "Finite":
            return f"Finite({self.order})"
        if self.tag == "Undecided":
            return f"Undecided({self.reason})"
        return self.tag


def classify_group(gens: Sequence[Matrix], enumeration_bound: int = DEFAULT_ENUMERATION_BOUND) -> GroupClass:
    """Strongest established class among Finite / VirtuallyAbelian / VirtuallySolvable / NonSolvable."""
    for g in gens:
        _require_invertible(g)
    if not gens:
        return GroupClass("Finite", order=1, virtually_abelian=True, finite=True)
    n = gens[0].rows
    gens = list(gens)
    env = envelope(gens)
    if not env.commutative:
        L = lie_closure(gens)
        cls = GroupClass("Undecided", virtually_abelian=False, finite=False, lie=L, envelope_witness=env.witness)
        if L.complete and not L.is_solvable():
            cls.tag = "NonSolvable"
        elif L.complete:
            cls.tag = "VirtuallySolvable"
        else:
            cls.reason = "incomplete relation lattice"
        return cls
    infinite = any(has_infinite_order(w) for w in _sample_words(gens))
    for p in admissible_primes(gens):
        res = congruence_certificate(gens, p, enumeration_bound)
        if res.image_order is None:
            continue
        if res.trivial:
            return GroupClass("Finite", order=res.image_order, virtually_abelian=True, finite=True,
                              lie=LieAlgebra(n, []), congruence=res)
        if res.abelian:
            return GroupClass("VirtuallyAbelian", virtually_abelian=True, finite=False, congruence=res)
    return GroupClass("Undecided", reason="no congruence certificate within the enumeration bound",
                      finite=False if infinite else None)
