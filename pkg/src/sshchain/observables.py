"""Per-eigenstate observables: Resta polarization, the atom-qubit reduced
density matrix, Schmidt number and the hybrid Bell diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import ChainParams
from .spectrum import EigenState

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class PolarizationUndefined(ValueError):
    """<X> is too close to zero for its phase to mean anything."""


@dataclass(frozen=True)
class RestaPolarization:
    value: float
    phase: float
    modulus: float


@dataclass(frozen=True, eq=False)
class ReducedAtomState:
    rho: np.ndarray
    bloch: np.ndarray
    schmidt_k: float


@dataclass(frozen=True)
class BellDiagnostic:
    sum_a: float
    sum_b: float
    overlap: float
    is_hybrid_bell: bool


def resta_polarization(state: EigenState, n_cells: int | None = None) -> RestaPolarization:
    """P = Im ln <exp(i 2 pi x / N)> / 2 pi, with x the cell index of both atoms.

    The phase is taken on the principal branch (-pi, pi], so ``value``
    lies in (-1/2, 1/2].
    """
    n = state.n_cells if n_cells is None else n_cells
    if n != state.n_cells:
        raise ValueError(f"state has {state.n_cells} cells, expected {n}")
    if n < 2:
        raise ValueError("polarization needs n_cells >= 2")
    cells = np.arange(n)
    x_exp = np.sum(np.exp(2j * np.pi * cells / n) * state.cell_density())
    modulus = abs(x_exp)
    if modulus < 1e-10:
        raise PolarizationUndefined(f"polarization ill-defined: |<X>| = {modulus:.3g}")
    phase = math.atan2(x_exp.imag, x_exp.real)
    if phase == -math.pi:
        phase = math.pi
    return RestaPolarization(phase / (2 * math.pi), phase, float(modulus))


def reduced_density_matrix(state: EigenState) -> ReducedAtomState:
    """Trace out the cell index, leaving the 2x2 atom (A/B) density matrix."""
    psi = state.amplitudes.reshape(state.n_cells, 2)
    rho = psi.T @ psi.conj()
    rho = 0.5 * (rho + rho.conj().T)
    bloch = np.array([np.trace(rho @ s).real for s in PAULI])
    purity = float(np.trace(rho @ rho).real)
    return ReducedAtomState(rho, bloch, 1.0 / purity)


def schmidt_number(state: EigenState) -> float:
    return reduced_density_matrix(state).schmidt_k


def schmidt_number_explicit(state: EigenState) -> float:
    """K from the sublattice weights and their overlap, without forming rho."""
    a, b = state.a, state.b
    sum_a = float(np.sum(np.abs(a) ** 2))
    sum_b = float(np.sum(np.abs(b) ** 2))
    overlap = abs(np.vdot(a, b))
    return 1.0 / (sum_a**2 + sum_b**2 + 2 * overlap**2)


def schmidt_number_bloch(bloch: np.ndarray) -> float:
    return 2.0 / (1.0 + float(np.dot(bloch, bloch)))


def bell_conditions(state: EigenState, tol: float = 0.05) -> BellDiagnostic:
    a, b = state.a, state.b
    sum_a = float(np.sum(np.abs(a) ** 2))
    sum_b = float(np.sum(np.abs(b) ** 2))
    overlap = np.vdot(a, b)
    overlap = float(overlap.real) if np.isrealobj(state.amplitudes) else complex(overlap)
    ok = abs(sum_a - 0.5) <= tol and abs(sum_b - 0.5) <= tol and abs(overlap) <= tol
    return BellDiagnostic(sum_a, sum_b, overlap, bool(ok))


def dimer_oracle(
    kind: str, sign: int = +1, n_cells: int = 2, cell: int = 0
) -> tuple[EigenState, float, ChainParams]:
    """Analytic dimer eigenstate, its exact Schmidt number and its chain.

    trivial:     (|m,A> + sign |m,B>) / sqrt2,   v=1, w=0, K=1
    topological: (|m,B> + sign |m+1,A>) / sqrt2, v=0, w=1, K=2
    Both have energy ``sign``.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    amps = np.zeros(2 * n_cells)
    if kind == "trivial":
        if not 0 <= cell < n_cells:
            raise ValueError("cell out of range")
        amps[2 * cell] = 1.0
        amps[2 * cell + 1] = sign
        params, k_exact = ChainParams(n_cells, 1.0, 0.0, 0.0), 1.0
    elif kind == "topological":
        if not 0 <= cell < n_cells - 1:
            raise ValueError("topological dimer needs cell + 1 < n_cells")
        amps[2 * cell + 1] = 1.0
        amps[2 * (cell + 1)] = sign
        params, k_exact = ChainParams(n_cells, 0.0, 1.0, 0.0), 2.0
    else:
        raise ValueError(f"unknown dimer kind {kind!r}")
    return EigenState(amps / math.sqrt(2.0), float(sign)), k_exact, params
