"""Random rank-one terms and their Jacobian row blocks.

All factors are row vectors and every block is written in the full
coordinate space of the array (width ``prod(dims)``, last index fastest).
Over a prime field every intermediate Kronecker product is reduced mod ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from genrank.rank_engine import FloatTol, PrimeField, ScalarRing
from genrank.structures import (
    CenteredSymmetricSlices,
    Free,
    Symmetric,
    SymmetricSlices,
    TensorStructure,
    info,
)


@dataclass(frozen=True)
class TermParams:
    """Factor vectors of one rank-one term.

    ``factors`` holds, by structure: the ``L`` mode factors (free), the single
    vector ``a`` (symmetric), or ``(b, c)`` for both slice variants. For the
    centered variant ``b`` is stored in full; its last entry is the negated
    sum of the others, so it sums to zero.
    """

    structure: TensorStructure
    factors: tuple[np.ndarray, ...]


def _modulus(ring):
    return ring.p if isinstance(ring, PrimeField) else None


def _kron(u, v, p=None):
    out = np.kron(u, v)
    return out % p if p is not None else out


def kron_rows(*vectors, p: int | None = None) -> np.ndarray:
    """Left-associated Kronecker product of row vectors (or 2-D row stacks)."""
    if not vectors:
        raise ValueError("kron_rows needs at least one argument")
    return reduce(lambda u, v: _kron(u, v, p), vectors)


def _identity(n, ring):
    return np.eye(n, dtype=np.int64 if isinstance(ring, PrimeField) else np.float64)


def _draw(rng, size, ring):
    if isinstance(ring, PrimeField):
        return rng.integers(1, ring.p, size=size, dtype=np.int64)
    return rng.standard_normal(size)


def draw_term(s: TensorStructure, rng: np.random.Generator, ring: ScalarRing) -> TermParams:
    """Draw the parameters of one term.

    Real rings get i.i.d. standard normal entries; a prime field gets entries
    uniform on ``{1, ..., p-1}``.
    """
    if isinstance(s, Free):
        factors = tuple(_draw(rng, n, ring) for n in s.dims)
    elif isinstance(s, Symmetric):
        factors = (_draw(rng, s.n, ring),)
    elif isinstance(s, SymmetricSlices):
        factors = (_draw(rng, s.j, ring), _draw(rng, s.k, ring))
    elif isinstance(s, CenteredSymmetricSlices):
        head = _draw(rng, s.j - 1, ring)
        last = -head.sum()
        if isinstance(ring, PrimeField):
            last %= ring.p
        b = np.append(head, last)
        factors = (b, _draw(rng, s.k, ring))
    else:
        raise TypeError(f"unknown structure {s!r}")
    return TermParams(s, factors)


def _slot_sum(factors, ring, slots=None):
    """Row groups ``kron(f_1, .., I at slot, .., f_L)``, one per slot.

    ``factors`` are 1-D; slot ``l`` uses an identity of size ``len(factors[l])``.
    """
    p = _modulus(ring)
    rows = [np.asarray(f)[None, :] for f in factors]
    groups = []
    for slot in range(len(factors)) if slots is None else slots:
        parts = list(rows)
        parts[slot] = _identity(rows[slot].shape[1], ring)
        groups.append(kron_rows(*parts, p=p))
    return groups


def block_free(dims, term: TermParams, ring: ScalarRing = FloatTol()) -> np.ndarray:
    """Jacobian block of a free term: ``sum(dims)`` rows, one group per mode."""
    dims = tuple(dims)
    factors = term.factors
    if len(factors) != len(dims) or any(len(f) != n for f, n in zip(factors, dims)):
        raise ValueError(f"term shapes {[len(f) for f in factors]} do not match dims {dims}")
    return np.vstack(_slot_sum(factors, ring))


def block_symmetric(n: int, order: int, term: TermParams, ring: ScalarRing = FloatTol()) -> np.ndarray:
    """Jacobian block of ``a -> a^{(x) order}``: ``n`` rows, summed over slots."""
    if len(term.factors) != 1 or len(term.factors[0]) != n:
        raise ValueError(f"symmetric term must be one vector of length {n}")
    a = term.factors[0]
    out = sum(_slot_sum([a] * order, ring))
    p = _modulus(ring)
    return out % p if p is not None else out


def block_indscal(j: int, k: int, term: TermParams, ring: ScalarRing = FloatTol()) -> np.ndarray:
    """Jacobian block of ``(b, c) -> b (x) b (x) c``: ``j + k`` rows."""
    b, c = _split_bc(term, j, k)
    p = _modulus(ring)
    top = sum(_slot_sum([b, b, c], ring, slots=(0, 1)))
    if p is not None:
        top %= p
    (bottom,) = _slot_sum([b, b, c], ring, slots=(2,))
    return np.vstack([top, bottom])


def block_centered(j: int, k: int, term: TermParams, ring: ScalarRing = FloatTol()) -> np.ndarray:
    """Jacobian block for double-centered slices: ``(j - 1) + k`` rows.

    The ``b`` direction is restricted to zero-sum vectors through
    ``[I_{j-1}, -1]``.
    """
    b, c = _split_bc(term, j, k)
    p = _modulus(ring)
    eye = _identity(j - 1, ring)
    z = np.hstack([eye, -np.ones((j - 1, 1), dtype=eye.dtype)])
    if p is not None:
        z %= p
    b_row, c_row = b[None, :], c[None, :]
    top = kron_rows(z, b_row, c_row, p=p) + kron_rows(b_row, z, c_row, p=p)
    if p is not None:
        top %= p
    bottom = kron_rows(b_row, b_row, _identity(k, ring), p=p)
    return np.vstack([top, bottom])


def _split_bc(term, j, k):
    if len(term.factors) != 2:
        raise ValueError("slice term must hold (b, c)")
    b, c = term.factors
    if len(b) != j or len(c) != k:
        raise ValueError(f"slice term shapes ({len(b)}, {len(c)}) do not match ({j}, {k})")
    return b, c


def block(s: TensorStructure, term: TermParams, ring: ScalarRing) -> np.ndarray:
    """Dispatch to the block builder for ``s``."""
    if isinstance(s, Free):
        out = block_free(s.dims, term, ring)
    elif isinstance(s, Symmetric):
        out = block_symmetric(s.n, s.order, term, ring)
    elif isinstance(s, SymmetricSlices):
        out = block_indscal(s.j, s.k, term, ring)
    elif isinstance(s, CenteredSymmetricSlices):
        out = block_centered(s.j, s.k, term, ring)
    else:
        raise TypeError(f"unknown structure {s!r}")
    st = info(s)
    assert out.shape == (st.block_rows, st.embed_cols), out.shape
    return out
