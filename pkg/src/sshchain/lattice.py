"""Real-space SSH chain with intra-cell (v), inter-cell (w) and
second-neighbour (z) hopping.

Basis ordering is cell-major with A before B: the flattened index of
``|m, alpha>`` is ``2*m + alpha`` (A=0, B=1).  Open chains are therefore
banded with three off-diagonals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np


class Boundary(str, enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class Atom(enum.IntEnum):
    A = 0
    B = 1


@dataclass(frozen=True)
class ChainParams:
    """Chain length, hoppings and boundary condition."""

    n_cells: int
    v: float
    w: float
    z: float = 0.0
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        if isinstance(self.n_cells, bool) or int(self.n_cells) != self.n_cells:
            raise ValueError(f"n_cells must be an integer, got {self.n_cells!r}")
        if self.n_cells < 1:
            raise ValueError(f"n_cells must be >= 1, got {self.n_cells}")
        for name in ("v", "w", "z"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"hopping {name} must be finite, got {value!r}")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        for name in ("v", "w", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def dim(self) -> int:
        return 2 * self.n_cells

    def with_(self, **changes) -> "ChainParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "n_cells": self.n_cells,
            "v": self.v,
            "w": self.w,
            "z": self.z,
            "boundary": self.boundary.value,
        }


@dataclass(frozen=True)
class BasisIndex:
    cell: int
    atom: Atom

    @property
    def flat(self) -> int:
        return 2 * self.cell + int(self.atom)

    @classmethod
    def from_flat(cls, i: int) -> "BasisIndex":
        return cls(i // 2, Atom(i % 2))


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Dense real symmetric Hamiltonian together with the parameters that built it."""

    matrix: np.ndarray
    params: ChainParams

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cells(self) -> int:
        return self.params.n_cells


def _bonds(n_cells: int, which: str, boundary: Boundary) -> list[tuple[int, int]]:
    # (i, j) pairs in the flattened basis, one entry per undirected bond
    if which == "v":
        return [(2 * m, 2 * m + 1) for m in range(n_cells)]
    pairs = []
    last = n_cells if boundary is Boundary.PERIODIC else n_cells - 1
    for m in range(last):
        nxt = (m + 1) % n_cells
        if which == "w":
            pairs.append((2 * m + 1, 2 * nxt))
        elif which == "z":
            pairs.append((2 * m, 2 * nxt + 1))
        else:
            raise ValueError(f"unknown bond type {which!r}")
    return pairs


def bond_matrix(n_cells: int, which: str, boundary: Boundary | str = Boundary.OPEN) -> np.ndarray:
    """Unit-amplitude adjacency matrix of one hopping family ('v', 'w' or 'z')."""
    boundary = Boundary(boundary)
    out = np.zeros((2 * n_cells, 2 * n_cells))
    for i, j in _bonds(n_cells, which, boundary):
        out[i, j] += 1.0
        out[j, i] += 1.0
    return out


def build_hamiltonian(params: ChainParams) -> HamiltonianMatrix:
    """Assemble the 2N x 2N real-space Hamiltonian.

    v couples (m,A)-(m,B), w couples (m,B)-(m+1,A) and z couples
    (m,A)-(m+1,B).  Periodic chains add the wrap-around w and z bonds.
    """
    n = params.n_cells
    h = np.zeros((2 * n, 2 * n))
    for which in ("v", "w", "z"):
        amp = getattr(params, which)
        if amp == 0.0:
            continue
        for i, j in _bonds(n, which, params.boundary):
            h[i, j] += amp
            h[j, i] += amp
    return HamiltonianMatrix(h, params)


def chiral_operator(n_cells: int) -> np.ndarray:
    """Sublattice operator diag(+1, -1, +1, -1, ...)."""
    if n_cells < 1:
        raise ValueError(f"n_cells must be >= 1, got {n_cells}")
    return np.diag(np.tile([1.0, -1.0], n_cells))
