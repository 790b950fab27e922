"""Generic rank of structured multi-way arrays by Jacobian saturation."""

from genrank.generic_rank import (
    GenericRankResult,
    RankConfig,
    SaturationError,
    consensus_rank,
    generic_rank,
)
from genrank.rank_engine import FloatTol, IncrementalBasis, PrimeField, batch_rank
from genrank.structures import (
    CenteredSymmetricSlices,
    Free,
    StructureError,
    StructureInfo,
    Symmetric,
    SymmetricSlices,
    info,
)

__all__ = [
    "CenteredSymmetricSlices",
    "FloatTol",
    "Free",
    "GenericRankResult",
    "IncrementalBasis",
    "PrimeField",
    "RankConfig",
    "SaturationError",
    "StructureError",
    "StructureInfo",
    "Symmetric",
    "SymmetricSlices",
    "batch_rank",
    "consensus_rank",
    "generic_rank",
    "info",
]
