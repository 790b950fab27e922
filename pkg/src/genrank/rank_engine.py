"""Matrix rank over the reals (SVD threshold) or over a prime field (exact).

Two pieces live here:

``batch_rank``
    Rank of a full matrix, from scratch.
``IncrementalBasis``
    A row space that grows one row (or one block of rows) at a time, so the
    saturation loop never refactorizes the whole Jacobian.

Prime-field arithmetic uses int64 numpy arrays holding residues in ``[0, p)``.
Products of two residues fit in 63 bits for ``p < 2**31.5``; matrix products
go through float64 BLAS on 16-bit limbs, which keeps every partial sum exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

MERSENNE_31 = 2**31 - 1


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    # deterministic Miller-Rabin for n < 3.3e24
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FloatTol:
    """Real arithmetic; a value counts as zero below ``rel_tol`` times the scale."""

    rel_tol: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")

    def describe(self) -> str:
        return f"float(tol={self.rel_tol:g})"

    @property
    def name(self) -> str:
        return "float"


@dataclass(frozen=True)
class PrimeField:
    """Exact arithmetic modulo the prime ``p``."""

    p: int = MERSENNE_31

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")
        if self.p * self.p >= 2**63 or self.p >= 2**32:
            raise ValueError(f"modulus {self.p} too large for 64-bit residue products")

    def describe(self) -> str:
        return f"field(p={self.p})"

    @property
    def name(self) -> str:
        return "field"


ScalarRing = Union[FloatTol, PrimeField]


def ring_from_descriptor(text: str) -> ScalarRing:
    """Parse the output of ``ring.describe()`` back into a ring."""
    head, _, rest = text.partition("(")
    key, _, value = rest.rstrip(")").partition("=")
    if head == "float" and key == "tol":
        return FloatTol(float(value))
    if head == "field" and key == "p":
        return PrimeField(int(value))
    raise ValueError(f"unrecognised ring descriptor {text!r}")


def _limbs(x):
    x = np.asarray(x, dtype=np.int64)
    return (x & 0xFFFF).astype(np.float64), (x >> 16).astype(np.float64)


def _limb_product(a_limbs, b_limbs, p):
    a0, a1 = a_limbs
    b0, b1 = b_limbs
    if a0.shape[-1] > 2**20:
        raise ValueError("inner dimension too large for exact limb product")
    high = (a1 @ b1).astype(np.int64) % p
    mid = (a0 @ b1 + a1 @ b0).astype(np.int64) % p
    low = (a0 @ b0).astype(np.int64)
    return (high * (2**32 % p) + mid * 65536 + low) % p


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """``a @ b mod p`` for residue matrices, exact.

    Both operands are split into 16-bit limbs and multiplied in float64 with
    BLAS; every partial sum stays below ``2**53`` for inner dimensions up to
    ``2**20``.
    """
    return _limb_product(_limbs(a), _limbs(b), p)


def _rank_mod_p(m: np.ndarray, p: int) -> int:
    a = np.array(m, dtype=np.int64) % p
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        nz = np.flatnonzero(a[rank:, c])
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        inv = pow(int(a[rank, c]), -1, p)
        a[rank] = a[rank] * inv % p
        below = a[rank + 1 :, c].copy()
        if below.any():
            a[rank + 1 :] = (a[rank + 1 :] - np.outer(below, a[rank])) % p
        rank += 1
    return rank


def batch_rank(m, ring: ScalarRing) -> int:
    """Rank of a dense matrix.

    For :class:`FloatTol` the rank is the number of singular values above
    ``rel_tol * sigma_max``; for :class:`PrimeField` it is the row rank found
    by Gaussian elimination modulo ``p``.
    """
    if isinstance(ring, PrimeField):
        a = np.asarray(m)
        if a.ndim != 2:
            raise ValueError("expected a 2-D matrix")
        if a.size == 0:
            return 0
        return _rank_mod_p(a, ring.p)
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if a.size == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > ring.rel_tol * sv[0]))


class IncrementalBasis:
    """Growing row-space basis.

    The float backend keeps orthonormal rows (Gram-Schmidt with a second
    re-orthogonalization pass).

    The field backend is append-only. Rows are stored in batches (one batch
    per :meth:`extend` call); each batch is in reduced echelon form on its own
    pivot columns and is zero on the pivot columns of every earlier batch.
    Restricted to the pivot columns the stored rows therefore form a unit
    block upper-triangular matrix, so a new row is reduced by one triangular
    solve for its coefficients followed by a single product with the basis.

    Parameters
    ----------
    width : int
        Length of every inserted row.
    ring : FloatTol or PrimeField
        Arithmetic used for the independence test.
    """

    def __init__(self, width: int, ring: ScalarRing):
        self.width = int(width)
        self.ring = ring
        self._exact = isinstance(ring, PrimeField)
        cap = min(16, max(self.width, 1))
        if self._exact:
            self._rows = np.zeros((cap, self.width), dtype=np.int64)
            self._lo = np.zeros((cap, self.width))
            self._hi = np.zeros((cap, self.width))
        else:
            self._rows = np.zeros((cap, self.width))
        self._pivots: list[int] = []
        self._batches: list[int] = []  # start offsets
        self.rank = 0

    @property
    def rows(self) -> np.ndarray:
        return self._rows[: self.rank]

    @property
    def pivots(self) -> list[int]:
        return list(self._pivots)

    def _reserve(self, extra):
        need = self.rank + extra
        if need <= self._rows.shape[0]:
            return
        cap = max(need, 2 * self._rows.shape[0])
        for name in ("_rows", "_lo", "_hi") if self._exact else ("_rows",):
            old = getattr(self, name)
            grown = np.zeros((cap, self.width), dtype=old.dtype)
            grown[: self.rank] = old[: self.rank]
            setattr(self, name, grown)

    def _check(self, rows):
        if rows.shape[-1] != self.width:
            raise ValueError(f"row width {rows.shape[-1]} != basis width {self.width}")

    def insert(self, row) -> bool:
        """Insert one row; return True iff it increased the rank."""
        return self.extend(np.atleast_2d(row))[0]

    def extend(self, rows) -> list[bool]:
        """Insert rows in order; one acceptance flag per row."""
        rows = np.atleast_2d(np.asarray(rows))
        self._check(rows)
        if self._exact:
            return self._extend_field(rows)
        rows = rows.astype(np.float64)
        if not np.all(np.isfinite(rows)):
            raise ValueError("row has non-finite entries")
        return [self._insert_float(r) for r in rows]

    def _insert_float(self, row):
        norm0 = np.linalg.norm(row)
        if norm0 == 0.0:
            return False
        v = row.copy()
        q = self._rows[: self.rank]
        for _ in range(2):
            v -= (q @ v) @ q
        res = np.linalg.norm(v)
        if res <= self.ring.rel_tol * norm0:
            return False
        self._reserve(1)
        self._rows[self.rank] = v / res
        self.rank += 1
        return True

    def _reduce_field(self, r):
        p = self.ring.p
        n = self.rank
        target = r[:, self._pivots]
        coef = np.empty_like(target)
        bounds = self._batches + [n]
        for s, e in zip(bounds[:-1], bounds[1:]):
            if s == 0:
                coef[:, s:e] = target[:, s:e]
            else:
                tri = self._rows[:s][:, self._pivots[s:e]]
                coef[:, s:e] = (target[:, s:e] - matmul_mod(coef[:, :s], tri, p)) % p
        shift = _limb_product(_limbs(coef), (self._lo[:n], self._hi[:n]), p)
        return (r - shift) % p

    def _extend_field(self, rows):
        p = self.ring.p
        r = np.array(rows, dtype=np.int64) % p
        if self.rank:
            r = self._reduce_field(r)

        accepted = []
        new_rows = []
        new_pivots = []
        for i in range(r.shape[0]):
            nz = np.flatnonzero(r[i])
            if nz.size == 0:
                accepted.append(False)
                continue
            c = int(nz[0])
            row = r[i] * pow(int(r[i, c]), -1, p) % p
            rest = r[i + 1 :, c].copy()
            if rest.any():
                r[i + 1 :] = (r[i + 1 :] - np.outer(rest, row)) % p
            for t, other in enumerate(new_rows):
                if other[c]:
                    new_rows[t] = (other - other[c] * row) % p
            new_rows.append(row)
            new_pivots.append(c)
            accepted.append(True)

        if new_rows:
            fresh = np.array(new_rows, dtype=np.int64)
            k = len(new_rows)
            self._reserve(k)
            n = self.rank
            self._rows[n : n + k] = fresh
            self._lo[n : n + k], self._hi[n : n + k] = _limbs(fresh)
            self._batches.append(n)
            self._pivots.extend(new_pivots)
            self.rank += k
        return accepted
