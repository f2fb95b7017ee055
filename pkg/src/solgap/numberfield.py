"""Algebraic numbers arising as eigenvalues, and their multiplicative relations.

Eigenvalues are stored as roots of irreducible rational polynomials with an
isolating box.  Exact arithmetic is only carried out in the rationals and in
quadratic fields, which is where the relation lattice is provably complete.
For higher-degree fields the lattice holds the relations that can be proven
exactly (norm relations on full conjugate sets and torsion) and is flagged
incomplete; an LLL search on logarithms reports further numerical
candidates without admitting them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Sequence

import mpmath
import sympy
from sympy.ntheory import factorint, sqrt_mod

from .linalg import RatPoly, as_fraction, factor_poly, format_rational, integer_hnf, integer_kernel, parse_rational


class ZeroEigenvalue(ValueError):
    pass


# ---------------------------------------------------------------------------
# quadratic fields


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Write n = s**2 * D with D squarefree (sign kept in D)."""
    if n == 0:
        return 0, 0
    sign = -1 if n < 0 else 1
    s, D = 1, 1
    for p, e in factorint(abs(n)).items():
        s *= p ** (e // 2)
        if e % 2:
            D *= p
    return s, sign * D


class QuadraticNumber:
    """a + b*sqrt(D) with rational a, b and squarefree D (D = 1 means the rationals)."""

    __slots__ = ("a", "b", "D")

    def __init__(self, a, b=0, D: int = 1):
        self.a = as_fraction(a)
        self.b = as_fraction(b)
        self.D = D
        if D == 1:
            self.a += self.b
            self.b = Fraction(0)

    def _check(self, other: "QuadraticNumber") -> int:
        if self.D == other.D or other.D == 1:
            return self.D
        if self.D == 1:
            return other.D
        raise ValueError("numbers live in different quadratic fields")

    def __mul__(self, other):
        if not isinstance(other, QuadraticNumber):
            other = QuadraticNumber(other)
        D = self._check(other)
        return QuadraticNumber(self.a * other.a + self.b * other.b * D, self.a * other.b + self.b * other.a, D)

    def __add__(self, other):
        if not isinstance(other, QuadraticNumber):
            other = QuadraticNumber(other)
        D = self._check(other)
        return QuadraticNumber(self.a + other.a, self.b + other.b, D)

    def conj(self) -> "QuadraticNumber":
        return QuadraticNumber(self.a, -self.b, self.D)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.D

    def inverse(self) -> "QuadraticNumber":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return QuadraticNumber(self.a / n, -self.b / n, self.D)

    def __pow__(self, k: int) -> "QuadraticNumber":
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        result = QuadraticNumber(1, 0, self.D)
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuadraticNumber):
            other = QuadraticNumber(other)
        return self.a == other.a and self.b == other.b and (self.b == 0 or self.D == other.D)

    def __hash__(self):
        return hash((self.a, self.b, self.D if self.b else 1))

    def is_one(self) -> bool:
        return self.a == 1 and self.b == 0

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def numeric(self, dps: int = 50) -> mpmath.mpc:
        with mpmath.workdps(dps):
            root = mpmath.sqrt(mpmath.mpf(self.D)) if self.D >= 0 else mpmath.mpc(0, mpmath.sqrt(-self.D))
            return mpmath.mpc(mpmath.mpf(self.a.numerator) / self.a.denominator) + \
                (mpmath.mpf(self.b.numerator) / self.b.denominator) * root

    def __repr__(self) -> str:
        if self.b == 0:
            return f"Q({format_rational(self.a)})"
        return f"Q({format_rational(self.a)} + {format_rational(self.b)}*sqrt({self.D}))"


# ---------------------------------------------------------------------------
# algebraic numbers


@dataclass(frozen=True)
class AlgebraicNumber:
    """A root of an irreducible monic polynomial, pinned down by an isolating box.

    ``index`` is the position of the root in canonical order: real roots
    ascending, then complex roots by (real part, imaginary part).  The selector
    is ``((re_lo, im_lo), (re_hi, im_hi))``; for real roots the imaginary
    bounds are both zero.
    """

    min_poly: RatPoly
    index: int
    selector: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]

    @property
    def degree(self) -> int:
        return self.min_poly.degree

    @property
    def is_real(self) -> bool:
        return self.selector[0][1] == 0 and self.selector[1][1] == 0

    def numeric(self, dps: int = 50):
        return _numeric_roots(self.min_poly.coeffs, dps)[self.index]

    def quadratic(self) -> QuadraticNumber | None:
        """Exact representation when the degree is at most two."""
        if self.degree == 1:
            return QuadraticNumber(-self.min_poly.coeffs[0])
        if self.degree != 2:
            return None
        q, p = self.min_poly.coeffs[0], self.min_poly.coeffs[1]
        disc = p * p - 4 * q
        s, D = squarefree_decompose(disc.numerator * disc.denominator)
        b = Fraction(s, 2 * disc.denominator)
        # canonical order puts the "-sqrt(D)" root first in both the real and complex case
        return QuadraticNumber(-p / 2, b if self.index == 1 else -b, D)

    def to_json(self) -> dict:
        (rl, il), (rh, ih) = self.selector
        return {
            "min_poly": self.min_poly.to_json(),
            "selector": [[format_rational(rl), format_rational(il)], [format_rational(rh), format_rational(ih)]],
        }

    @classmethod
    def from_json(cls, data: dict) -> "AlgebraicNumber":
        poly = RatPoly.from_json(data["min_poly"])
        (rl, il), (rh, ih) = [[parse_rational(x) for x in corner] for corner in data["selector"]]
        for root in roots_of(poly):
            if root.selector == ((rl, il), (rh, ih)):
                return root
        # selector from another refinement: locate the unique root inside it
        matches = []
        for root in roots_of(poly):
            z = root.numeric(30)
            if rl <= mpmath.re(z) <= rh and il <= mpmath.im(z) <= ih:
                matches.append(root)
        if len(matches) != 1:
            raise ValueError("selector does not isolate a root")
        return matches[0]


@lru_cache(maxsize=4096)
def _numeric_roots(coeffs: tuple[Fraction, ...], dps: int) -> tuple:
    """All roots in canonical order at ``dps`` digits."""
    deg = len(coeffs) - 1
    if deg == 1:
        return (mpmath.mpc(-mpmath.mpf(coeffs[0].numerator) / coeffs[0].denominator),)
    with mpmath.workdps(dps + 20):
        mp_coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(coeffs)]
        roots = mpmath.polyroots(mp_coeffs, maxsteps=400, extraprec=4 * dps + 100)
        roots = [mpmath.mpc(r) for r in roots]
        eps = mpmath.mpf(10) ** (-(dps // 2))
        real = sorted((mpmath.mpc(mpmath.re(r), 0) for r in roots if abs(mpmath.im(r)) < eps), key=lambda z: mpmath.re(z))
        cplx = sorted((r for r in roots if abs(mpmath.im(r)) >= eps), key=lambda z: (mpmath.re(z), mpmath.im(z)))
        return tuple(real + cplx)


@lru_cache(maxsize=1024)
def _roots_cached(coeffs: tuple[Fraction, ...]) -> tuple[AlgebraicNumber, ...]:
    poly = RatPoly(coeffs)
    x = sympy.Symbol("x")
    sp = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(coeffs)], x, domain=sympy.QQ)
    real_iv, cplx_iv = sp.intervals(all=True, eps=sympy.Rational(1, 10 ** 6))
    boxes = []
    for (lo, hi), _ in real_iv:
        lo, hi = Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q))
        boxes.append(((lo, Fraction(0)), (hi, Fraction(0))))
    for (c1, c2), _ in cplx_iv:
        r1, i1 = [Fraction(int(t.p), int(t.q)) for t in (sympy.re(c1), sympy.im(c1))]
        r2, i2 = [Fraction(int(t.p), int(t.q)) for t in (sympy.re(c2), sympy.im(c2))]
        boxes.append(((min(r1, r2), min(i1, i2)), (max(r1, r2), max(i1, i2))))
    numeric = _numeric_roots(coeffs, 30)
    out = []
    for idx, z in enumerate(numeric):
        zr, zi = mpmath.re(z), mpmath.im(z)
        best = min(boxes, key=lambda b: abs(zr - float((b[0][0] + b[1][0]) / 2)) + abs(zi - float((b[0][1] + b[1][1]) / 2)))
        out.append(AlgebraicNumber(poly, idx, best))
    return tuple(out)


def roots_of(poly: RatPoly) -> list[AlgebraicNumber]:
    """All roots of an irreducible polynomial, in canonical order."""
    poly = poly.monic()
    return list(_roots_cached(poly.coeffs))


def eigenvalues(char: RatPoly) -> list[tuple[AlgebraicNumber, int]]:
    """Distinct eigenvalues with algebraic multiplicity, grouped by irreducible factor."""
    out = []
    for f, m in factor_poly(char):
        for root in roots_of(f):
            out.append((root, m))
    return out


def rational(value) -> AlgebraicNumber:
    return roots_of(RatPoly([-as_fraction(value), 1]))[0]


# ---------------------------------------------------------------------------
# roots of unity


def euler_phi(n: int) -> int:
    result = n
    for p in factorint(n):
        result = result // p * (p - 1)
    return result


@lru_cache(maxsize=None)
def cyclotomic(n: int) -> RatPoly:
    x = sympy.Symbol("x")
    coeffs = sympy.Poly(sympy.cyclotomic_poly(n, x), x).all_coeffs()
    return RatPoly(Fraction(int(c)) for c in reversed(coeffs))


def cyclotomic_order(poly: RatPoly) -> int | None:
    """n if ``poly`` (monic irreducible) is the n-th cyclotomic polynomial."""
    poly = poly.monic()
    k = poly.degree
    if any(c.denominator != 1 for c in poly.coeffs) or abs(poly.coeffs[0]) != 1:
        return None
    for n in range(1, 2 * k * k + 3):
        if euler_phi(n) == k and cyclotomic(n) == poly:
            return n
    return None


def root_of_unity_order(lam: AlgebraicNumber) -> int | None:
    return cyclotomic_order(lam.min_poly)


def orders_with_phi_at_most(k: int) -> list[int]:
    return [n for n in range(1, 2 * k * k + 3) if euler_phi(n) <= k]


# ---------------------------------------------------------------------------
# multiplicative relations


@dataclass
class RelationLattice:
    n: int
    basis: list[tuple[int, ...]]
    complete: bool
    candidates: list[tuple[int, ...]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"n": self.n, "basis": [list(v) for v in self.basis], "complete": self.complete}


def _valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _qvaluation(q: Fraction, p: int) -> int:
    return _valuation(q.numerator, p) - _valuation(q.denominator, p)


def _integral_parts(beta: QuadraticNumber) -> tuple[int, int, int]:
    C = beta.a.denominator * beta.b.denominator // gcd(beta.a.denominator, beta.b.denominator)
    return int(beta.a * C), int(beta.b * C), C


def _split_type(p: int, D: int) -> str:
    if p == 2:
        r = D % 8
        return "split" if r == 1 else ("inert" if r == 5 else "ramified")
    if D % p == 0:
        return "ramified"
    return "split" if pow(D % p, (p - 1) // 2, p) == 1 else "inert"


def _padic_sqrt(D: int, p: int, prec: int) -> int:
    """A square root of D modulo p**prec that is correct modulo p**(prec - 1)."""
    roots = sqrt_mod(D, p ** prec, all_roots=True)
    if not roots:
        raise ValueError("no p-adic square root")
    return min(roots)


def _valuation_rows(betas: Sequence[QuadraticNumber], D: int) -> list[list[int]]:
    primes: set[int] = set()
    parts = [_integral_parts(b) for b in betas]
    for (A, B, C) in parts:
        primes.update(factorint(C))
        primes.update(factorint(abs(A * A - B * B * D)) if D != 1 else factorint(abs(A)))
    rows = []
    for p in sorted(primes):
        if D == 1:
            rows.append([_qvaluation(b.a, p) for b in betas])
            continue
        kind = _split_type(p, D)
        if kind != "split":
            rows.append([_qvaluation(b.norm(), p) for b in betas])
            continue
        prec = max(_valuation(abs(A * A - B * B * D), p) for (A, B, C) in parts) + 4
        r = _padic_sqrt(D, p, prec)
        mod = p ** (prec - 1)
        for sign in (1, -1):
            row = []
            for (A, B, C) in parts:
                val = (A + sign * B * r) % mod
                row.append(_valuation(val, p) - _valuation(C, p))
            rows.append(row)
    return rows


def _torsion_generator(D: int) -> tuple[QuadraticNumber, int]:
    if D == -1:
        return QuadraticNumber(0, 1, -1), 4
    if D == -3:
        return QuadraticNumber(Fraction(1, 2), Fraction(1, 2), -3), 6
    return QuadraticNumber(-1, 0, D), 2


def _product(betas: Sequence[QuadraticNumber], e: Sequence[int], D: int) -> QuadraticNumber:
    out = QuadraticNumber(1, 0, D)
    for b, k in zip(betas, e):
        if k:
            out = out * (b ** k)
    return out


_LOG_MIN_FUNDAMENTAL_UNIT = 0.4812  # log of the golden ratio, the smallest real quadratic unit > 1


def _quadratic_relations(betas: Sequence[QuadraticNumber], D: int) -> list[tuple[int, ...]]:
    """Complete relation lattice of nonzero elements of Q(sqrt D) (D = 1: the rationals)."""
    n = len(betas)
    rows = _valuation_rows(betas, D)
    units_basis = integer_kernel(rows, n) if rows else [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    if not units_basis:
        return []
    units = [_product(betas, k, D) for k in units_basis]
    m = len(units)
    if D > 1:
        with mpmath.workdps(80):
            logs = [mpmath.log(abs(u.numeric(80))) for u in units]
            ref = max(range(m), key=lambda j: abs(logs[j]))
            if abs(logs[ref]) < mpmath.mpf(10) ** -40:
                coeff_rows: list[list[int]] = []
            else:
                bound = int(float(abs(logs[ref])) / _LOG_MIN_FUNDAMENTAL_UNIT) + 2
                ratios = []
                for j in range(m):
                    approx = Fraction(mpmath.nstr(logs[j] / logs[ref], 60, strip_zeros=False)).limit_denominator(bound)
                    check = (units[j] ** approx.denominator) * (units[ref] ** (-approx.numerator))
                    if not (check.is_one() or (check * QuadraticNumber(-1, 0, D)).is_one()):
                        raise ArithmeticError("unit logarithm ratio failed exact verification")
                    ratios.append(approx)
                den = 1
                for r in ratios:
                    den = den * r.denominator // gcd(den, r.denominator)
                coeff_rows = [[int(r * den) for r in ratios]]
    else:
        coeff_rows = []
    free = integer_kernel(coeff_rows, m) if coeff_rows else [tuple(1 if i == j else 0 for j in range(m)) for i in range(m)]
    # exponent vectors in terms of betas whose product is torsion
    torsion_vecs = []
    for c in free:
        e = [0] * n
        for cj, k in zip(c, units_basis):
            for i in range(n):
                e[i] += cj * k[i]
        torsion_vecs.append(tuple(e))
    zeta, w = _torsion_generator(D)
    powers = [zeta ** t for t in range(w)]
    logs_t = []
    for e in torsion_vecs:
        val = _product(betas, e, D)
        t = next((t for t, z in enumerate(powers) if z == val), None)
        if t is None:
            raise ArithmeticError("unit is not torsion after removing the unit-rank part")
        logs_t.append(t)
    r = len(torsion_vecs)
    kern = integer_kernel([logs_t + [w]], r + 1)
    out = []
    for c in kern:
        e = [0] * n
        for cj, v in zip(c[:r], torsion_vecs):
            for i in range(n):
                e[i] += cj * v[i]
        out.append(tuple(e))
    basis = integer_hnf(out)
    for e in basis:
        if not _product(betas, e, D).is_one():
            raise ArithmeticError("relation failed exact verification")
    return basis


def common_quadratic_field(lams: Sequence[AlgebraicNumber]) -> int | None:
    """D if all numbers lie in Q(sqrt D) (1 for the rationals), else None."""
    D = 1
    for lam in lams:
        q = lam.quadratic()
        if q is None:
            return None
        if q.b != 0:
            if D not in (1, q.D):
                return None
            D = q.D
    return D


def _lll_candidates(lams: Sequence[AlgebraicNumber], bound: int = 2 ** 20) -> list[tuple[int, ...]]:
    """Integer relations among log|lam| and arg(lam)/2pi suggested by LLL (unverified)."""
    n = len(lams)
    dps = 60
    with mpmath.workdps(dps):
        zs = [lam.numeric(dps) for lam in lams]
        logs = [mpmath.log(abs(z)) for z in zs]
        args = [mpmath.arg(z) / (2 * mpmath.pi) for z in zs]
        scale = mpmath.mpf(10) ** 30
        # last column lets arguments absorb an integer multiple of a full turn
        cols = [[int(mpmath.nint(scale * logs[i])), int(mpmath.nint(scale * args[i]))] for i in range(n)]
        rows = []
        for i in range(n):
            rows.append([1 if j == i else 0 for j in range(n)] + [0] + cols[i])
        rows.append([0] * n + [1] + [0, int(scale)])
    M = sympy.Matrix(rows)
    from sympy.polys.matrices import DomainMatrix
    red = DomainMatrix.from_Matrix(M).convert_to(sympy.ZZ).lll().to_Matrix()
    out = []
    for i in range(red.rows):
        row = [int(x) for x in red.row(i)]
        e = tuple(row[:n])
        if any(e) and max(abs(x) for x in e) <= bound and abs(row[n + 1]) < 10 ** 5 and abs(row[n + 2]) < 10 ** 5:
            out.append(e)
    return out


def mult_relation_lattice(lams: Sequence[AlgebraicNumber]) -> RelationLattice:
    """Lattice of integer vectors e with prod lam_i**e_i == 1."""
    n = len(lams)
    if n == 0:
        return RelationLattice(0, [], True)
    for lam in lams:
        if lam.min_poly.degree == 1 and lam.min_poly.coeffs[0] == 0:
            raise ZeroEigenvalue("zero is not invertible")
    D = common_quadratic_field(lams)
    if D is not None:
        betas = [lam.quadratic() for lam in lams]
        betas = [QuadraticNumber(b.a, b.b, D) if b.b == 0 else b for b in betas]
        return RelationLattice(n, _quadratic_relations(betas, D), True)
    relations = [tuple(v) for v in galois_stable_relations(lams)]
    basis = integer_hnf(relations) if relations else []
    cands = []
    for e in _lll_candidates(lams):
        cands.append(e)
    return RelationLattice(n, basis, False, cands)


def galois_stable_relations(lams: Sequence[AlgebraicNumber]) -> list[tuple[int, ...]]:
    """Exactly provable relations: torsion, norm relations on full conjugate sets, and
    relations among the members lying in a common quadratic field."""
    n = len(lams)
    out: list[tuple[int, ...]] = []
    for i, lam in enumerate(lams):
        order = root_of_unity_order(lam)
        if order is not None:
            e = [0] * n
            e[i] = order
            out.append(tuple(e))
    groups: dict[RatPoly, list[int]] = {}
    for i, lam in enumerate(lams):
        groups.setdefault(lam.min_poly, []).append(i)
    full = [(f, idx) for f, idx in groups.items() if len(idx) == f.degree and len({lams[i].index for i in idx}) == f.degree]
    if full:
        norms = [QuadraticNumber((-1) ** f.degree * f.coeffs[0]) for f, _ in full]
        for c in _quadratic_relations(norms, 1):
            e = [0] * n
            for cj, (f, idx) in zip(c, full):
                for i in idx:
                    e[i] = cj
            out.append(tuple(e))
    # quadratic-field clusters
    clusters: dict[int, list[int]] = {}
    for i, lam in enumerate(lams):
        q = lam.quadratic()
        if q is not None:
            clusters.setdefault(q.D if q.b != 0 else 1, []).append(i)
    rational_idx = clusters.get(1, [])
    keys = [k for k in clusters if k != 1] or [1]
    for key in keys:
        idx = sorted(set(clusters.get(key, []) + rational_idx))
        if not idx:
            continue
        betas = []
        for i in idx:
            q = lams[i].quadratic()
            betas.append(QuadraticNumber(q.a, q.b, key) if q.b != 0 else QuadraticNumber(q.a, 0, key))
        for c in _quadratic_relations(betas, key):
            e = [0] * n
            for cj, i in zip(c, idx):
                e[i] = cj
            out.append(tuple(e))
    return out


def verify_relation(lams: Sequence[AlgebraicNumber], e: Sequence[int]) -> bool:
    """Exact check of prod lam_i**e_i == 1 when the support lies in one quadratic field."""
    support = [i for i, k in enumerate(e) if k]
    if not support:
        return True
    D = common_quadratic_field([lams[i] for i in support])
    if D is None:
        raise NotImplementedError("exact verification needs a common quadratic field")
    betas = []
    for i in support:
        q = lams[i].quadratic()
        betas.append(QuadraticNumber(q.a, q.b, D) if q.b != 0 else QuadraticNumber(q.a, 0, D))
    return _product(betas, [e[i] for i in support], D).is_one()
