"""Exact linear algebra over the rationals.

Everything here works on :class:`fractions.Fraction` entries and is
deterministic: pivots are chosen in column order, kernel bases set free
variables to one in pivot order, and polynomial factors are sorted by
degree and then coefficients.  Matrices and polynomials are immutable.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Sequence

import sympy

Vector = tuple[Fraction, ...]


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, float):
        raise TypeError("floats are not accepted in exact arithmetic")
    return Fraction(value)


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` into a Fraction (q must be positive)."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        num_i, den_i = int(num), int(den)
        if den_i <= 0:
            raise ValueError(f"denominator must be positive in {text!r}")
        return Fraction(num_i, den_i)
    return Fraction(int(text))


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def vec(values: Iterable) -> Vector:
    return tuple(as_fraction(v) for v in values)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def is_zero_vector(v: Sequence[Fraction]) -> bool:
    return all(x == 0 for x in v)


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b) if a and b else 0


def common_denominator(values: Iterable[Fraction]) -> int:
    return reduce(lcm, (Fraction(v).denominator for v in values), 1)


def primitive_integer_vector(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale ``v`` to a primitive integer vector whose first nonzero entry is positive."""
    den = common_denominator(v)
    ints = [int(x * den) for x in v]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    if g == 0:
        return tuple(ints)
    ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(ints)


class Matrix:
    """Immutable dense matrix over the rationals."""

    __slots__ = ("rows", "cols", "_e", "_hash")

    def __init__(self, rows: Iterable[Iterable], cols: int | None = None):
        entries = tuple(tuple(as_fraction(x) for x in row) for row in rows)
        if cols is None:
            cols = len(entries[0]) if entries else 0
        if any(len(r) != cols for r in entries):
            raise ValueError("ragged matrix")
        self.rows = len(entries)
        self.cols = cols
        self._e = entries
        self._hash = None

    @classmethod
    def _raw(cls, entries: tuple[tuple[Fraction, ...], ...], cols: int) -> "Matrix":
        m = object.__new__(cls)
        m.rows = len(entries)
        m.cols = cols
        m._e = entries
        m._hash = None
        return m

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        one, zero = Fraction(1), Fraction(0)
        return cls._raw(tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)), n)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls._raw(tuple((Fraction(0),) * cols for _ in range(rows)), cols)

    @classmethod
    def diag(cls, values: Sequence) -> "Matrix":
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Fraction]], rows: int | None = None) -> "Matrix":
        if not columns:
            return cls._raw(tuple(() for _ in range(rows or 0)), 0)
        return cls(zip(*columns), len(columns))

    @classmethod
    def from_flat(cls, flat: Sequence[Fraction], n: int) -> "Matrix":
        return cls._raw(tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n)), n)

    @property
    def entries(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._e

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, idx):
        i, j = idx
        return self._e[i][j]

    def row(self, i: int) -> Vector:
        return self._e[i]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self._e)

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def flat(self) -> Vector:
        return tuple(x for r in self._e for x in r)

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self.shape == other.shape and self._e == other._e

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._e)
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_rational(x) for x in r) for r in self._e)
        return f"Matrix([{body}])"

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix._raw(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._e, other._e)), self.cols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix._raw(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._e, other._e)), self.cols)

    def __neg__(self) -> "Matrix":
        return Matrix._raw(tuple(tuple(-a for a in r) for r in self._e), self.cols)

    def scale(self, c) -> "Matrix":
        c = as_fraction(c)
        return Matrix._raw(tuple(tuple(c * a for a in r) for r in self._e), self.cols)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.columns()
        zero = Fraction(0)
        out = []
        for r in self._e:
            out.append(tuple(sum((a * b for a, b in zip(r, c) if a and b), zero) for c in cols))
        return Matrix._raw(tuple(out), other.cols)

    def apply(self, v: Sequence[Fraction]) -> Vector:
        if len(v) != self.cols:
            raise ValueError("dimension mismatch")
        zero = Fraction(0)
        return tuple(sum((a * b for a, b in zip(r, v) if a and b), zero) for r in self._e)

    @property
    def T(self) -> "Matrix":
        if not self._e:
            return Matrix._raw(tuple(() for _ in range(self.cols)), 0)
        return Matrix._raw(tuple(zip(*self._e)), self.rows)

    def trace(self) -> Fraction:
        return sum((self._e[i][i] for i in range(min(self.shape))), Fraction(0))

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._e for x in r)

    def is_identity(self) -> bool:
        return self.is_square and self == Matrix.identity(self.rows)

    def det(self) -> Fraction:
        if not self.is_square:
            raise ValueError("determinant of a non-square matrix")
        a = [list(r) for r in self._e]
        n = self.rows
        det = Fraction(1)
        for c in range(n):
            p = next((r for r in range(c, n) if a[r][c] != 0), None)
            if p is None:
                return Fraction(0)
            if p != c:
                a[c], a[p] = a[p], a[c]
                det = -det
            piv = a[c][c]
            det *= piv
            for r in range(c + 1, n):
                f = a[r][c] / piv
                if f:
                    rowc = a[c]
                    a[r] = [x - f * y for x, y in zip(a[r], rowc)]
        return det

    def inverse(self) -> "Matrix":
        if not self.is_square:
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        aug = Matrix._raw(tuple(r + Matrix.identity(n)._e[i] for i, r in enumerate(self._e)), 2 * n)
        R, rank, pivots = rref(aug)
        if pivots[:n] != list(range(n)):
            raise ZeroDivisionError("matrix is singular")
        return Matrix._raw(tuple(R._e[i][n:] for i in range(n)), n)

    def __pow__(self, k: int) -> "Matrix":
        if not self.is_square:
            raise ValueError("power of a non-square matrix")
        if k < 0:
            return self.inverse() ** (-k)
        result = Matrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            k >>= 1
            if k:
                base = base @ base
        return result

    def commutator(self, other: "Matrix") -> "Matrix":
        return self @ other - other @ self

    def to_json(self) -> list[list[str]]:
        return [[format_rational(x) for x in r] for r in self._e]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[str]]) -> "Matrix":
        return cls([[parse_rational(str(x)) for x in r] for r in data])


def rref(M: Matrix) -> tuple[Matrix, int, list[int]]:
    """Reduced row echelon form, rank and pivot columns of ``M``."""
    a = [list(r) for r in M.entries]
    nrows, ncols = M.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        if piv != 1:
            a[r] = [x / piv for x in a[r]]
        rowr = a[r]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], rowr)]
        pivots.append(c)
        r += 1
    return Matrix._raw(tuple(tuple(row) for row in a), ncols), len(pivots), pivots


def rank(M: Matrix) -> int:
    return rref(M)[1]


def kernel(M: Matrix) -> list[Vector]:
    """Basis of the right null space; free variables set to one in pivot order."""
    R, rk, pivots = rref(M)
    free = [c for c in range(M.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * M.cols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -R[i, f]
        basis.append(tuple(v))
    return basis


def left_kernel(M: Matrix) -> list[Vector]:
    return kernel(M.T)


def solve(M: Matrix, b: Sequence[Fraction]) -> Vector | None:
    """One solution of ``M x = b`` (free variables zero), or None."""
    aug = Matrix([list(r) + [bi] for r, bi in zip(M.entries, b)], M.cols + 1)
    R, rk, pivots = rref(aug)
    if pivots and pivots[-1] == M.cols:
        return None
    x = [Fraction(0)] * M.cols
    for i, p in enumerate(pivots):
        x[p] = R[i, M.cols]
    return tuple(x)


def row_basis(vectors: Iterable[Sequence[Fraction]], dim: int) -> list[Vector]:
    """Canonical (reduced echelon) basis of the span of ``vectors``."""
    rows = [tuple(v) for v in vectors]
    if not rows:
        return []
    R, rk, _ = rref(Matrix(rows, dim))
    return [R.row(i) for i in range(rk)]


class EchelonSpan:
    """Incrementally maintained span, kept in reduced echelon form.

    ``add`` returns True when the vector enlarges the span.  Membership tests
    reduce against the stored rows, so they are exact.
    """

    def __init__(self, dim: int, vectors: Iterable[Sequence[Fraction]] = ()):
        self.dim = dim
        self._rows: list[list[Fraction]] = []
        self._pivots: list[int] = []
        self.originals: list[Vector] = []
        for v in vectors:
            self.add(v)

    def __len__(self) -> int:
        return len(self._rows)

    def reduce(self, v: Sequence[Fraction]) -> list[Fraction]:
        w = list(v)
        for row, p in zip(self._rows, self._pivots):
            c = w[p]
            if c:
                w = [x - c * y for x, y in zip(w, row)]
        return w

    def contains(self, v: Sequence[Fraction]) -> bool:
        return is_zero_vector(self.reduce(v))

    def add(self, v: Sequence[Fraction]) -> bool:
        if len(v) != self.dim:
            raise ValueError("dimension mismatch")
        v = tuple(as_fraction(x) for x in v)
        w = self.reduce(v)
        p = next((i for i, x in enumerate(w) if x != 0), None)
        if p is None:
            return False
        piv = w[p]
        w = [x / piv for x in w]
        for k, row in enumerate(self._rows):
            c = row[p]
            if c:
                self._rows[k] = [x - c * y for x, y in zip(row, w)]
        pos = 0
        while pos < len(self._pivots) and self._pivots[pos] < p:
            pos += 1
        self._rows.insert(pos, w)
        self._pivots.insert(pos, p)
        self.originals.append(v)
        return True

    def basis(self) -> list[Vector]:
        return [tuple(r) for r in self._rows]

    def coordinates(self, v: Sequence[Fraction]) -> Vector | None:
        """Coordinates of ``v`` in the echelon basis, or None if outside the span."""
        coords = tuple(v[p] for p in self._pivots)
        w = list(v)
        for c, row in zip(coords, self._rows):
            if c:
                w = [x - c * y for x, y in zip(w, row)]
        return coords if is_zero_vector(w) else None


# ---------------------------------------------------------------------------
# polynomials


class RatPoly:
    """Univariate polynomial over the rationals, coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        c = [as_fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)

    @classmethod
    def x(cls) -> "RatPoly":
        return cls([0, 1])

    @classmethod
    def constant(cls, c) -> "RatPoly":
        return cls([c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __eq__(self, other) -> bool:
        return isinstance(other, RatPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "RatPoly(0)"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c:
                terms.append(f"{format_rational(c)}*x^{k}" if k else format_rational(c))
        return "RatPoly(" + " + ".join(terms) + ")"

    def monic(self) -> "RatPoly":
        if self.is_zero:
            return self
        lc = self.leading
        return RatPoly(c / lc for c in self.coeffs)

    def __add__(self, other: "RatPoly") -> "RatPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RatPoly(x + y for x, y in zip(a, b))

    def __neg__(self) -> "RatPoly":
        return RatPoly(-c for c in self.coeffs)

    def __sub__(self, other: "RatPoly") -> "RatPoly":
        return self + (-other)

    def __mul__(self, other) -> "RatPoly":
        if not isinstance(other, RatPoly):
            c = as_fraction(other)
            return RatPoly(c * x for x in self.coeffs)
        if self.is_zero or other.is_zero:
            return RatPoly([])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RatPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "RatPoly":
        result = RatPoly([1])
        for _ in range(k):
            result = result * self
        return result

    def divmod(self, other: "RatPoly") -> tuple["RatPoly", "RatPoly"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(len(rem) - other.degree, 0)
        lc = other.leading
        while len(rem) - 1 >= other.degree and rem:
            shift = len(rem) - 1 - other.degree
            f = rem[-1] / lc
            q[shift] = f
            for i, c in enumerate(other.coeffs):
                rem[shift + i] -= f * c
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        return RatPoly(q), RatPoly(rem)

    def __mod__(self, other: "RatPoly") -> "RatPoly":
        return self.divmod(other)[1]

    def __floordiv__(self, other: "RatPoly") -> "RatPoly":
        return self.divmod(other)[0]

    def derivative(self) -> "RatPoly":
        return RatPoly(k * c for k, c in enumerate(self.coeffs) if k)

    def __call__(self, value):
        """Evaluate at a scalar or a square Matrix (Horner's rule)."""
        if isinstance(value, Matrix):
            n = value.rows
            result = Matrix.zeros(n, n)
            ident = Matrix.identity(n)
            for c in reversed(self.coeffs):
                result = result @ value
                if c:
                    result = result + ident.scale(c)
            return result
        result = 0
        for c in reversed(self.coeffs):
            result = result * value + c
        return result

    def to_json(self) -> list[str]:
        return [format_rational(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "RatPoly":
        return cls(parse_rational(str(c)) for c in data)

    def sort_key(self):
        return (self.degree, self.coeffs)


def poly_gcd(a: RatPoly, b: RatPoly) -> RatPoly:
    while not b.is_zero:
        a, b = b, a % b
    return a.monic()


def squarefree_part(p: RatPoly) -> RatPoly:
    return (p // poly_gcd(p, p.derivative())).monic()


def charpoly(M: Matrix) -> RatPoly:
    """det(xI - M) by the Faddeev-LeVerrier recurrence."""
    if not M.is_square:
        raise ValueError("characteristic polynomial of a non-square matrix")
    n = M.rows
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    ident = Matrix.identity(n)
    Mk = Matrix.zeros(n, n)
    for k in range(1, n + 1):
        Mk = M @ (Mk + ident.scale(coeffs[n - k + 1]))
        coeffs[n - k] = -Mk.trace() / k
    return RatPoly(coeffs)


def minpoly(M: Matrix) -> RatPoly:
    """Monic minimal polynomial from the first linear dependency among powers of M."""
    n = M.rows
    span = EchelonSpan(n * n)
    powers = [Matrix.identity(n)]
    span.add(powers[0].flat())
    while True:
        nxt = powers[-1] @ M
        if not span.add(nxt.flat()):
            cols = [p.flat() for p in powers]
            coeffs = solve(Matrix.from_columns(cols), nxt.flat())
            return RatPoly([-c for c in coeffs] + [Fraction(1)])
        powers.append(nxt)


def annihilating_polys(M: Matrix) -> tuple[RatPoly, RatPoly]:
    return charpoly(M), minpoly(M)


def factor_poly(p: RatPoly) -> list[tuple[RatPoly, int]]:
    """Monic irreducible factors over Q with multiplicities, canonically sorted."""
    if p.is_zero:
        raise ValueError("cannot factor the zero polynomial")
    if p.degree == 0:
        return []
    x = sympy.Symbol("x")
    sp = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(p.coeffs)], x, domain=sympy.QQ)
    _, factors = sp.factor_list()
    out = []
    for f, m in factors:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(f.all_coeffs())]
        out.append((RatPoly(coeffs).monic(), m))
    out.sort(key=lambda fm: (fm[0].sort_key(), fm[1]))
    return out


def expand_factors(factors: Sequence[tuple[RatPoly, int]], constant=1) -> RatPoly:
    result = RatPoly([constant])
    for f, m in factors:
        result = result * (f ** m)
    return result


# ---------------------------------------------------------------------------
# integer lattices


def integer_hnf(rows: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Row Hermite normal form (nonzero rows only) of an integer matrix."""
    a = [list(map(int, r)) for r in rows]
    if not a:
        return []
    ncols = len(a[0])
    r = 0
    for c in range(ncols):
        # bring gcd of column entries below r into row r
        while True:
            nz = [i for i in range(r, len(a)) if a[i][c] != 0]
            if not nz:
                break
            i_min = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[i_min] = a[i_min], a[r]
            done = True
            for i in range(r + 1, len(a)):
                if a[i][c]:
                    q = a[i][c] // a[r][c]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    if a[i][c]:
                        done = False
            if done:
                break
        if r < len(a) and a[r][c] != 0:
            if a[r][c] < 0:
                a[r] = [-x for x in a[r]]
            for i in range(r):
                q = a[i][c] // a[r][c]
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
            r += 1
            if r == len(a):
                break
    return [tuple(row) for row in a[:r] if any(row)]


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    """Basis (in Hermite form) of {e in Z^ncols : A e = 0} for an integer matrix A."""
    # column operations on [A; I] realised as row operations on the transpose
    aug = [[int(rows[i][j]) for i in range(len(rows))] + [1 if k == j else 0 for k in range(ncols)]
           for j in range(ncols)]
    m = len(rows)
    h = integer_hnf(aug) if aug else []
    kern = [tuple(r[m:]) for r in h if all(x == 0 for x in r[:m])]
    # rows of h with zero left part are exactly a basis of the kernel lattice
    if len(kern) < ncols - _int_rank(rows, ncols):
        raise AssertionError("integer kernel computation lost rank")
    return integer_hnf(kern)


def _int_rank(rows: Sequence[Sequence[int]], ncols: int) -> int:
    if not rows:
        return 0
    return rank(Matrix([[Fraction(x) for x in r] for r in rows], ncols))


def saturate_lattice(vectors: Sequence[Sequence[Fraction]], dim: int) -> list[tuple[int, ...]]:
    """Basis of (Q-span of vectors) intersected with Z^dim, in Hermite form."""
    basis = row_basis(vectors, dim)
    if not basis:
        return []
    complement = kernel(Matrix(basis, dim))
    if not complement:
        return [tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim)]
    rows = [primitive_integer_vector(c) for c in complement]
    return integer_kernel(rows, dim)
