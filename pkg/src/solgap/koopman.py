"""Numerical estimate of the averaging operator on a finite window of characters.

The Koopman action on L^2 of the solenoid is, on the Fourier side, a
permutation of the nonzero characters with phases:
(U_g xi)(chi) = exp(2 pi i phase(chi, x_g)) xi(theta_g^T chi).  We compress
A = (1/2m) sum (U_g + U_g^*) to characters v / a^k with |v_i| <= H, k <= K by
zero padding and estimate its top eigenvalue by power iteration.  Compression
only lowers the norm, so the estimate is a lower bound.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
from dataclasses import dataclass
from math import lcm
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .solenoid import AffineGen, SolenoidSpec

DEFAULT_CAP = 2_000_000


class TruncationTooLarge(ValueError):
    pass


class NoConvergence(RuntimeError):
    def __init__(self, message: str, estimate: "SpectralEstimate"):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class Truncation:
    H: int
    K: int = 0

    def __post_init__(self):
        if self.H < 1:
            raise ValueError("H must be at least 1")
        if self.K < 0:
            raise ValueError("K must be nonnegative")


@dataclass
class SpectralEstimate:
    lam: float
    iterations: int
    residual: float
    truncation: Truncation
    generators_hash: str
    converged: bool = True


@dataclass
class KoopmanOperator:
    """Characters stored as integer vectors w = chi * a^K, one row per character."""

    spec: SolenoidSpec
    truncation: Truncation
    chars: np.ndarray
    images: list[np.ndarray]  # per generator: index of theta^T chi, or -1 when outside
    phases: list[np.ndarray]  # per generator: angle in [0, 1) as float

    @property
    def size(self) -> int:
        return len(self.chars)

    def character(self, i: int) -> tuple:
        from fractions import Fraction

        scale = self.spec.a ** self.truncation.K
        return tuple(Fraction(int(x), scale) for x in self.chars[i])

    def matrix(self) -> sp.csr_matrix:
        """The compressed self-adjoint averaging operator."""
        n = self.size
        m = len(self.images)
        total = sp.csr_matrix((n, n), dtype=complex)
        for img, ph in zip(self.images, self.phases):
            rows = np.nonzero(img >= 0)[0]
            cols = img[rows]
            vals = np.exp(2j * np.pi * ph[rows])
            U = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
            total = total + U + U.getH()
        return (total / (2 * m)).tocsr()


def generators_hash(spec: SolenoidSpec, gens: Sequence[AffineGen]) -> str:
    payload = json.dumps({"a": spec.a, "d": spec.d, "g": [g.to_json() for g in gens]}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def enumerate_characters(spec: SolenoidSpec, trunc: Truncation, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Nonzero characters v / a^k, ordered by (denominator exponent, height, lexicographic).

    Returned as integer rows w = chi * a^K; each character appears once, at
    its smallest denominator exponent.
    """
    a, d, H = spec.a, spec.d, trunc.H
    K = 0 if a == 1 else trunc.K
    count = ((2 * H + 1) ** d - 1) * (K + 1)
    if count > cap:
        raise TruncationTooLarge(f"{count} characters exceed the cap {cap}")
    grid = np.array(list(itertools.product(range(-H, H + 1), repeat=d)), dtype=np.int64)
    grid = grid[np.any(grid != 0, axis=1)]
    height = np.max(np.abs(grid), axis=1)
    # lexicographic order within a height shell
    lex = np.lexsort(tuple(grid[:, j] for j in reversed(range(d))))
    rank = np.empty(len(grid), dtype=np.int64)
    rank[lex] = np.arange(len(grid))
    base_order = np.lexsort((rank, height))
    blocks = []
    for k in range(K + 1):
        v = grid[base_order]
        if k > 0:
            # drop characters already present with a smaller exponent
            v = v[np.any(v % a != 0, axis=1)]
        blocks.append(v * a ** (K - k))
    return np.concatenate(blocks) if blocks else np.zeros((0, d), dtype=np.int64)


def _integer_transpose(g: AffineGen) -> tuple[np.ndarray, int]:
    mt = g.matrix.T
    den = 1
    for row in mt.entries:
        for x in row:
            den = lcm(den, x.denominator)
    return np.array([[int(x * den) for x in row] for row in mt.entries], dtype=np.int64), int(den)


def _phases(spec: SolenoidSpec, g: AffineGen, chars: np.ndarray, K: int) -> np.ndarray:
    """Angle of chi at the translation, from the integer form w = chi * a^K.

    With the translation y / m (m prime to a) the angle is
    (w . y) * (a^K)^-1 mod m, divided by m.
    """
    m = 1
    for x in g.translation:
        m = lcm(m, x.denominator)
    if m == 1:
        return np.zeros(len(chars))
    y = np.array([int(x * m) for x in g.translation], dtype=object)
    inv = pow(spec.a ** K, -1, m)
    dots = chars.astype(object) @ y
    r = np.array([(int(t) * inv) % m for t in dots], dtype=np.float64)
    return r / m


def build_operator(spec: SolenoidSpec, gens: Sequence[AffineGen], trunc: Truncation, cap: int = DEFAULT_CAP) -> KoopmanOperator:
    K = 0 if spec.a == 1 else trunc.K
    chars = enumerate_characters(spec, trunc, cap)
    index = {row.tobytes(): i for i, row in enumerate(chars)}
    images, phases = [], []
    for g in gens:
        M, den = _integer_transpose(g)
        scaled = chars @ M.T
        ok = np.all(scaled % den == 0, axis=1)
        img = np.full(len(chars), -1, dtype=np.int64)
        targets = scaled // den
        for i in np.nonzero(ok)[0]:
            j = index.get(targets[i].tobytes())
            if j is not None:
                img[i] = j
        images.append(img)
        phases.append(_phases(spec, g, chars, K))
    return KoopmanOperator(spec, Truncation(trunc.H, K), chars, images, phases)


def _start_vector(op: KoopmanOperator) -> np.ndarray:
    """Uniform on the lowest shell (smallest exponent and height), plus a small seeded perturbation.

    The perturbation matters: the uniform shell vector can sit inside a
    symmetry-invariant subspace that misses the top eigenvector.
    """
    a = op.spec.a
    K = op.truncation.K
    heights = np.max(np.abs(op.chars), axis=1)
    lowest = heights == heights.min() if K == 0 else np.zeros(op.size, dtype=bool)
    if K > 0:
        # characters with exponent 0 are exactly the rows divisible by a^K
        integral = np.all(op.chars % (a ** K) == 0, axis=1)
        h0 = np.where(integral, heights // (a ** K), np.iinfo(np.int64).max)
        lowest = h0 == h0.min()
    x = lowest.astype(float) / np.sqrt(lowest.sum())
    x = x + 1e-2 * np.random.default_rng(0).standard_normal(op.size) / np.sqrt(op.size)
    return (x / np.linalg.norm(x)).astype(complex)


def estimate_top(
    spec: SolenoidSpec,
    gens: Sequence[AffineGen],
    trunc: Truncation,
    max_iters: int = 20000,
    tol: float = 1e-5,
    cap: int = DEFAULT_CAP,
    check_every: int = 8,
    power_iters: int = 300,
) -> SpectralEstimate:
    """Top eigenvalue of the compressed averaging operator by power iteration.

    Iterates with (A + I) / 2 so that the bottom of the spectrum (bipartite
    orbit graphs have -lambda as an eigenvalue) cannot stall convergence.
    When the top of the spectrum is nearly degenerate, power iteration
    crawls; after ``power_iters`` steps the current iterate seeds an
    ARPACK Lanczos run instead, and the reported residual is recomputed
    directly from A either way.
    """
    if not gens:
        raise ValueError("need at least one generator")
    op = build_operator(spec, gens, trunc, cap)
    A = op.matrix()
    x = _start_vector(op)
    if not any(np.any(ph) for ph in op.phases):
        A = A.real
        x = x.real
    B = ((A + sp.identity(op.size, dtype=A.dtype, format="csr")) * 0.5).tocsr()
    lam, residual = 0.0, float("inf")
    it = 0
    while it < min(max_iters, power_iters):
        y = B @ x
        it += 1
        if it % check_every == 0 or it == max_iters:
            mu = float(np.real(np.vdot(x, y)))
            # B = (A + I) / 2, so A x - lam x = 2 (B x - mu x) with lam = 2 mu - 1
            lam = 2.0 * mu - 1.0
            residual = 2.0 * float(np.linalg.norm(y - mu * x))
            if residual <= tol:
                break
        y /= np.linalg.norm(y)
        x = y
    if residual > tol and it < max_iters:
        lam, residual, extra = _lanczos(A, x, tol, max_iters - it)
        it += extra
    est = SpectralEstimate(lam, it, residual, op.truncation, generators_hash(spec, gens), residual <= tol)
    if not est.converged:
        raise NoConvergence(f"residual {residual:.3g} above {tol:g} after {max_iters} iterations", est)
    return est


def _lanczos(A, x0: np.ndarray, tol: float, budget: int) -> tuple[float, float, int]:
    count = [0]

    def mv(v):
        count[0] += 1
        return A @ v

    op = sla.LinearOperator(A.shape, matvec=mv, dtype=A.dtype)
    try:
        vals, vecs = sla.eigsh(op, k=1, which="LA", v0=x0, tol=tol / 10, maxiter=max(budget // 20, 1))
    except sla.ArpackNoConvergence as exc:
        if not len(exc.eigenvalues):
            return float("nan"), float("inf"), count[0]
        vals, vecs = exc.eigenvalues, exc.eigenvectors
    v = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    Av = A @ v
    lam = float(np.real(np.vdot(v, Av)))
    return lam, float(np.linalg.norm(Av - lam * v)), count[0]


def gap_curve(
    spec: SolenoidSpec,
    gens: Sequence[AffineGen],
    truncs: Sequence[Truncation],
    max_iters: int = 20000,
    tol: float = 1e-5,
) -> list[tuple[Truncation, SpectralEstimate]]:
    if not truncs:
        raise ValueError("need at least one truncation")
    rows = []
    for t in truncs:
        try:
            est = estimate_top(spec, gens, t, max_iters, tol)
        except NoConvergence as exc:
            est = exc.estimate
        rows.append((t, est))
    return rows


def curve_csv(spec: SolenoidSpec, rows: Sequence[tuple[Truncation, SpectralEstimate]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "d", "H", "K", "lambda", "iterations", "residual"])
    for t, est in rows:
        w.writerow([spec.a, spec.d, t.H, est.truncation.K, f"{est.lam:.10f}", est.iterations, f"{est.residual:.3e}"])
    return buf.getvalue()
