"""Tensor structure descriptors and the dimension counts the saturation loop needs.

Four families are supported:

* :class:`Free` -- unconstrained ``N_1 x ... x N_L`` arrays,
* :class:`Symmetric` -- fully symmetric arrays of dimension ``n`` and order ``L``,
* :class:`SymmetricSlices` -- ``j x j x k`` arrays whose ``k`` frontal slices are
  symmetric (the INDSCAL structure),
* :class:`CenteredSymmetricSlices` -- as above, with every slice double centered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union


class StructureError(ValueError):
    """Raised when a structure is given invalid dimensions."""


@dataclass(frozen=True)
class Free:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) < 2:
            raise StructureError(f"free structure needs order >= 2, got dims={dims}")
        if any(d < 1 for d in dims):
            raise StructureError(f"every dimension must be >= 1, got dims={dims}")

    @property
    def order(self) -> int:
        return len(self.dims)

    def describe(self) -> str:
        return "free " + "x".join(map(str, self.dims))


@dataclass(frozen=True)
class Symmetric:
    n: int
    order: int

    def __post_init__(self):
        if self.n < 1:
            raise StructureError(f"symmetric dimension must be >= 1, got n={self.n}")
        if self.order < 2:
            raise StructureError(f"symmetric order must be >= 2, got order={self.order}")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.n,) * self.order

    def describe(self) -> str:
        return f"symmetric n={self.n} order={self.order}"


@dataclass(frozen=True)
class SymmetricSlices:
    j: int
    k: int

    def __post_init__(self):
        _check_slices(self.j, self.k)

    order = 3

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.j, self.j, self.k)

    def describe(self) -> str:
        return f"indscal {self.j}x{self.j}x{self.k}"


@dataclass(frozen=True)
class CenteredSymmetricSlices:
    j: int
    k: int

    def __post_init__(self):
        _check_slices(self.j, self.k)

    order = 3

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.j, self.j, self.k)

    def describe(self) -> str:
        return f"centered indscal {self.j}x{self.j}x{self.k}"


TensorStructure = Union[Free, Symmetric, SymmetricSlices, CenteredSymmetricSlices]


def _check_slices(j, k):
    if j < 2:
        raise StructureError(f"slice dimension j must be >= 2, got j={j}")
    if k < 1:
        raise StructureError(f"number of slices k must be >= 1, got k={k}")


@dataclass(frozen=True)
class StructureInfo:
    """Dimension counts for one structure.

    Attributes
    ----------
    ambient_dim : int
        Dimension of the linear span of the structure's rank-one set.
    params_per_term : int
        Essential parameters of one rank-one term, after removing scalings.
    block_rows : int
        Jacobian rows contributed by one term.
    embed_cols : int
        Width of the Jacobian in full coordinates (product of the dims).
    """

    ambient_dim: int
    params_per_term: int
    block_rows: int
    embed_cols: int


def info(s: TensorStructure) -> StructureInfo:
    if isinstance(s, Free):
        total = math.prod(s.dims)
        return StructureInfo(
            ambient_dim=total,
            params_per_term=sum(s.dims) - (len(s.dims) - 1),
            block_rows=sum(s.dims),
            embed_cols=total,
        )
    if isinstance(s, Symmetric):
        return StructureInfo(
            ambient_dim=math.comb(s.n + s.order - 1, s.order),
            params_per_term=s.n,
            block_rows=s.n,
            embed_cols=s.n**s.order,
        )
    if isinstance(s, SymmetricSlices):
        return StructureInfo(
            ambient_dim=s.k * s.j * (s.j + 1) // 2,
            params_per_term=s.j + s.k - 1,
            block_rows=s.j + s.k,
            embed_cols=s.j * s.j * s.k,
        )
    if isinstance(s, CenteredSymmetricSlices):
        return StructureInfo(
            ambient_dim=s.k * s.j * (s.j - 1) // 2,
            params_per_term=s.j + s.k - 2,
            block_rows=(s.j - 1) + s.k,
            embed_cols=s.j * s.j * s.k,
        )
    raise StructureError(f"unknown structure {s!r}")


def to_dict(s: TensorStructure) -> dict:
    """Plain-json description of a structure (inverse of :func:`from_dict`)."""
    if isinstance(s, Free):
        return {"kind": "free", "dims": list(s.dims)}
    if isinstance(s, Symmetric):
        return {"kind": "symmetric", "n": s.n, "order": s.order}
    if isinstance(s, SymmetricSlices):
        return {"kind": "indscal", "j": s.j, "k": s.k}
    if isinstance(s, CenteredSymmetricSlices):
        return {"kind": "centered_indscal", "j": s.j, "k": s.k}
    raise StructureError(f"unknown structure {s!r}")


def from_dict(d: dict) -> TensorStructure:
    kind = d.get("kind")
    if kind == "free":
        return Free(tuple(d["dims"]))
    if kind == "symmetric":
        return Symmetric(d["n"], d["order"])
    if kind == "indscal":
        return SymmetricSlices(d["j"], d["k"])
    if kind == "centered_indscal":
        return CenteredSymmetricSlices(d["j"], d["k"])
    raise StructureError(f"unknown structure kind {kind!r}")
