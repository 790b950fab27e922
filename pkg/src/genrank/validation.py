"""Independent desk-scale oracles.

* :func:`random_member` -- a dense random array of a given structure,
* :func:`classify_222` -- exact real rank of a ``2 x 2 x 2`` array from its
  slice pencil,
* :func:`als_fit` -- alternating least squares CP fitting with detection of
  diverging (degenerate) components.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from genrank.structures import (
    CenteredSymmetricSlices,
    Free,
    Symmetric,
    SymmetricSlices,
    TensorStructure,
)


@dataclass
class DenseTensor:
    """Row-major (last index fastest) array with explicit dims."""

    dims: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.values = np.asarray(self.values, dtype=np.float64).ravel()
        if self.values.size != math.prod(self.dims):
            raise ValueError(f"{self.values.size} values for dims {self.dims}")

    @classmethod
    def from_array(cls, arr) -> DenseTensor:
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr.shape, arr.ravel())

    @property
    def array(self) -> np.ndarray:
        return self.values.reshape(self.dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def random_member(s: TensorStructure, rng: np.random.Generator) -> DenseTensor:
    """Standard-normal draw projected onto the structure's subspace."""
    if isinstance(s, Free):
        return DenseTensor(s.dims, rng.standard_normal(math.prod(s.dims)))
    if isinstance(s, Symmetric):
        x = rng.standard_normal(s.dims)
        perms = list(itertools.permutations(range(s.order)))
        x = sum(np.transpose(x, p) for p in perms) / len(perms)
        return DenseTensor.from_array(x)
    if isinstance(s, (SymmetricSlices, CenteredSymmetricSlices)):
        x = rng.standard_normal(s.dims)
        x = (x + x.transpose(1, 0, 2)) / 2
        if isinstance(s, CenteredSymmetricSlices):
            x = x - x.mean(axis=0, keepdims=True)
            x = x - x.mean(axis=1, keepdims=True)
        return DenseTensor.from_array(x)
    raise TypeError(f"unknown structure {s!r}")


class Rank222(enum.Enum):
    RANK_TWO = "rank2"
    RANK_THREE = "rank3"
    BOUNDARY = "boundary"


def pencil_coefficients(t: DenseTensor) -> tuple[float, float, float]:
    """Coefficients ``(c2, c1, c0)`` of ``det(A + lam * B)`` for slices A, B."""
    if t.dims != (2, 2, 2):
        raise ValueError(f"expected a 2x2x2 array, got dims {t.dims}")
    x = t.array
    a, b = x[:, :, 0], x[:, :, 1]
    c2 = b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0]
    c0 = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    c1 = a[0, 0] * b[1, 1] + a[1, 1] * b[0, 0] - a[0, 1] * b[1, 0] - a[1, 0] * b[0, 1]
    return c2, c1, c0


def classify_222(t: DenseTensor, rel_tol: float = 1e-10) -> Rank222:
    """Real rank of a generic ``2 x 2 x 2`` array.

    Two distinct real roots of ``det(A + lam B) = 0`` give rank 2, a complex
    pair gives rank 3. Repeated roots, a singular leading slice, or a
    discriminant within ``rel_tol`` of zero (relative to the squared
    coefficient scale) are reported as boundary cases.
    """
    c2, c1, c0 = pencil_coefficients(t)
    scale = max(abs(c2), abs(c1), abs(c0))
    if scale == 0.0 or abs(c2) <= rel_tol * scale:
        return Rank222.BOUNDARY
    disc = c1 * c1 - 4.0 * c2 * c0
    if abs(disc) <= rel_tol * scale * scale:
        return Rank222.BOUNDARY
    return Rank222.RANK_TWO if disc > 0 else Rank222.RANK_THREE


def rank_split_experiment(n_samples: int, rng: np.random.Generator) -> dict[str, float]:
    """Fractions of standard-normal 2x2x2 arrays in each rank class."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    counts = {c.value: 0 for c in Rank222}
    for _ in range(n_samples):
        counts[classify_222(random_member(Free((2, 2, 2)), rng)).value] += 1
    return {k: v / n_samples for k, v in counts.items()}


# alternating least squares -------------------------------------------------


@dataclass
class FitResult:
    relative_residual: float
    degenerate: bool
    iterations_used: int
    term_norms: np.ndarray
    factors: list[np.ndarray] = field(repr=False, default_factory=list)
    history: list[float] = field(repr=False, default_factory=list)

    @property
    def max_term_norm(self) -> float:
        return float(self.term_norms.max()) if self.term_norms.size else 0.0


def khatri_rao(mats):
    """Column-wise Kronecker product; the last matrix's row index runs fastest."""
    out = mats[0]
    for m in mats[1:]:
        out = (out[:, None, :] * m[None, :, :]).reshape(-1, out.shape[1])
    return out


def unfold(x: np.ndarray, mode: int) -> np.ndarray:
    return np.moveaxis(x, mode, 0).reshape(x.shape[mode], -1)


def reconstruct(factors) -> np.ndarray:
    dims = tuple(f.shape[0] for f in factors)
    return (factors[0] @ khatri_rao(factors[1:]).T).reshape(dims)


def _term_norms(factors):
    """Per-term product of factor column norms; works on batched factors too."""
    return np.prod([np.linalg.norm(f, axis=-2) for f in factors], axis=0)


def _kr_batched(mats):
    out = mats[0]
    for m in mats[1:]:
        out = (out[:, :, None, :] * m[:, None, :, :]).reshape(out.shape[0], -1, out.shape[-1])
    return out


def _residuals(x0, factors, norm):
    recon = factors[0] @ np.swapaxes(_kr_batched(factors[1:]), 1, 2)
    return np.linalg.norm(x0 - recon, axis=(1, 2)) / norm


def _sweep(unfolded, factors):
    factors = list(factors)
    grams = [np.swapaxes(f, 1, 2) @ f for f in factors]
    for m in range(len(factors)):
        others = [k for k in range(len(factors)) if k != m]
        gamma = np.prod([grams[k] for k in others], axis=0)
        kr = _kr_batched([factors[k] for k in others])
        rhs = np.swapaxes(unfolded[m] @ kr, 1, 2)
        try:
            sol = np.linalg.solve(gamma, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.pinv(gamma, hermitian=True) @ rhs
        factors[m] = np.swapaxes(sol, 1, 2)
        grams[m] = np.swapaxes(factors[m], 1, 2) @ factors[m]
    return factors


def _line_search(x0, old, delta, norm):
    """Exact minimizer of the residual along ``old + mu * delta``.

    The reconstruction is a polynomial of degree ``L`` in ``mu``, so the
    squared residual is a polynomial of degree ``2L`` whose coefficients come
    from the ``2**L`` mixed reconstructions. Candidates are the real parts of
    its critical points plus ``mu = 1`` (the plain sweep).
    """
    nd = len(old)
    batch = x0.shape[0] if x0.shape[0] == old[0].shape[0] else old[0].shape[0]
    parts = [np.zeros((batch,) + x0.shape[1:]) for _ in range(nd + 1)]
    for mask in itertools.product((0, 1), repeat=nd):
        mats = [delta[m] if mask[m] else old[m] for m in range(nd)]
        parts[sum(mask)] += mats[0] @ np.swapaxes(_kr_batched(mats[1:]), 1, 2)
    err = np.stack([x0 - parts[0]] + [-p for p in parts[1:]])
    err = err.reshape(nd + 1, batch, -1)
    gram = np.einsum("kbi,lbi->bkl", err, err)
    coef = np.zeros((batch, 2 * nd + 1))
    for k in range(nd + 1):
        for l in range(nd + 1):
            coef[:, k + l] += gram[:, k, l]
    deriv = coef[:, 1:] * np.arange(1, 2 * nd + 1)
    lead = deriv[:, -1:]
    n = 2 * nd - 1
    comp = np.zeros((batch, n, n))
    comp[:, 1:, :-1] = np.eye(n - 1)
    safe = np.where(np.abs(lead) > 0, lead, 1.0)
    comp[:, :, -1] = -deriv[:, :-1] / safe
    roots = np.linalg.eigvals(comp).real
    cands = np.concatenate([np.ones((batch, 1)), np.where(np.isfinite(roots), roots, 1.0)], axis=1)
    powers = cands[:, :, None] ** np.arange(2 * nd + 1)
    phi = np.einsum("bcj,bj->bc", powers, coef)
    pick = np.argmin(phi, axis=1)
    mu = cands[np.arange(batch), pick]
    res = np.sqrt(np.maximum(phi[np.arange(batch), pick], 0.0)) / norm
    return mu, res


def als_fit(
    t: DenseTensor,
    r: int,
    rng: np.random.Generator | None = None,
    restarts: int = 20,
    max_iter: int = 2000,
    conv_tol: float = 1e-12,
    blowup: float = 1e3,
    line_search: bool = True,
) -> FitResult:
    """Fit ``r`` rank-one terms to ``t`` by ALS; keep the best restart.

    All restarts run together as one batch. Each sweep solves the
    least-squares problem for every factor matrix in turn. With
    ``line_search`` the sweep is followed by an exact line search along the
    change of the factors; the step is kept only when it lowers the residual,
    so the residual never increases.

    A run stops when its relative residual changes by less than ``conv_tol``
    or when its largest term norm (product of the term's factor column norms)
    passes ``blowup * ||t||``; the fit is flagged degenerate when the blowup
    criterion holds at termination.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    x = t.array
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise ValueError("cannot fit the zero tensor")
    rng = np.random.default_rng() if rng is None else rng
    blowup_at = blowup * norm
    nd = x.ndim

    unfolded = [unfold(x, m)[None] for m in range(nd)]
    factors = [rng.standard_normal((restarts, n, r)) for n in x.shape]
    prev = _residuals(unfolded[0], factors, norm)
    active = np.ones(restarts, dtype=bool)
    iters = np.zeros(restarts, dtype=int)
    history = [[] for _ in range(restarts)]

    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        old = [f[idx] for f in factors]
        new = _sweep([u for u in unfolded], old)
        res = _residuals(unfolded[0], new, norm)
        if line_search:
            delta = [n - o for o, n in zip(old, new)]
            mu, res_ls = _line_search(unfolded[0], old, delta, norm)
            better = res_ls < res
            if better.any():
                trial = [o + mu[:, None, None] * d for o, d in zip(old, delta)]
                res_trial = _residuals(unfolded[0], trial, norm)
                better &= res_trial < res
                for m in range(nd):
                    new[m][better] = trial[m][better]
                res = np.where(better, res_trial, res)
        for m in range(nd):
            factors[m][idx] = new[m]
        norms = _term_norms(new).max(axis=-1)
        for j, run in enumerate(idx):
            history[run].append(float(res[j]))
        iters[idx] = it
        done = (np.abs(prev[idx] - res) < conv_tol * res) | (res < conv_tol) | (norms > blowup_at)
        prev[idx] = res
        active[idx[done]] = False

    final = _residuals(unfolded[0], factors, norm)
    best = int(np.argmin(final))
    best_factors = [f[best] for f in factors]
    norms = _term_norms(best_factors)
    return FitResult(
        relative_residual=float(final[best]),
        degenerate=bool(norms.max() > blowup_at),
        iterations_used=int(iters[best]),
        term_norms=norms,
        factors=best_factors,
        history=history[best],
    )
