"""Generic rank by Jacobian saturation.

Random rank-one terms are appended one at a time; each contributes a block of
Jacobian rows. The Jacobian rank after ``r`` terms is the dimension of the
closure of the set of rank-``<= r`` arrays of the structure. The loop stops
as soon as that rank fails to grow (or reaches the ambient dimension); the
number of useful terms is the smallest typical rank, which is the generic
rank over an algebraically closed field.

Random streams use numpy's PCG64 generator. Trial sub-seeds are derived with
a SplitMix64 scramble so sweeps reproduce on every platform.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from genrank import jacobian
from genrank.rank_engine import IncrementalBasis, PrimeField, ScalarRing
from genrank.structures import TensorStructure, info

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 output step applied to ``x`` (64-bit)."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(seed: int, trial: int) -> int:
    """Seed of trial ``trial``; trial 0 keeps the caller's seed unchanged."""
    if trial == 0:
        return seed & MASK64
    return splitmix64((seed ^ trial) & MASK64)


@dataclass(frozen=True)
class RankConfig:
    ring: ScalarRing = field(default_factory=PrimeField)
    seed: int = 1
    trials: int = 3
    max_terms: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.max_terms is not None and self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class GenericRankResult:
    structure: TensorStructure
    rank: int
    image_dim: int
    fiber_dim: int
    ambient_dim: int
    params_per_term: int
    terms_appended: int
    backend: str
    seed: int
    rank_history: tuple[int, ...] = ()

    @property
    def key(self) -> tuple[int, int]:
        return (self.rank, self.image_dim)


class SaturationError(RuntimeError):
    """The rank was still growing when ``max_terms`` terms had been appended.

    ``history`` holds the Jacobian rank after each appended term. On the float
    backend this usually points at a tolerance problem.
    """

    def __init__(self, structure, max_terms, history):
        self.structure = structure
        self.max_terms = max_terms
        self.history = tuple(history)
        super().__init__(
            f"{structure.describe()}: no saturation after {max_terms} terms "
            f"(rank history {list(self.history)})"
        )


def generic_rank(s: TensorStructure, cfg: RankConfig = RankConfig()) -> GenericRankResult:
    """Single-trial saturation run for structure ``s``.

    Identical ``(s, cfg)`` always give an identical result.
    """
    st = info(s)
    max_terms = cfg.max_terms if cfg.max_terms is not None else st.ambient_dim + 1
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    basis = IncrementalBasis(st.embed_cols, cfg.ring)

    history: list[int] = []
    prev = 0
    rbar = None
    for r in range(1, max_terms + 1):
        term = jacobian.draw_term(s, rng, cfg.ring)
        basis.extend(jacobian.block(s, term, cfg.ring))
        history.append(basis.rank)
        if basis.rank == st.ambient_dim:
            rbar = r
            break
        if basis.rank == prev:
            rbar = r - 1
            break
        prev = basis.rank
    if rbar is None:
        raise SaturationError(s, max_terms, history)

    image_dim = basis.rank
    return GenericRankResult(
        structure=s,
        rank=rbar,
        image_dim=image_dim,
        fiber_dim=rbar * st.params_per_term - image_dim,
        ambient_dim=st.ambient_dim,
        params_per_term=st.params_per_term,
        terms_appended=len(history),
        backend=cfg.ring.describe(),
        seed=cfg.seed,
        rank_history=tuple(history),
    )


def consensus_rank(
    s: TensorStructure, cfg: RankConfig = RankConfig()
) -> tuple[GenericRankResult, bool]:
    """Run ``cfg.trials`` independent trials and combine them.

    Returns the majority result and whether all trials agreed on
    ``(rank, image_dim)``. Without a strict majority the largest rank wins:
    an unlucky draw can only lose Jacobian rank, never add it.
    """
    runs = [
        generic_rank(s, replace(cfg, seed=trial_seed(cfg.seed, i)))
        for i in range(cfg.trials)
    ]
    votes = Counter(r.key for r in runs)
    agreement = len(votes) == 1
    key, count = votes.most_common(1)[0]
    if count * 2 > len(runs):
        best = next(r for r in runs if r.key == key)
    else:
        best = max(runs, key=lambda r: r.key)
    return replace(best, seed=cfg.seed), agreement


def counting_bound(s: TensorStructure) -> int:
    """Lower bound ``ceil(ambient / params_per_term)`` on the generic rank."""
    st = info(s)
    return math.ceil(st.ambient_dim / st.params_per_term)
