"""Straightforward dense reference path, kept separate from the main one.

The Hamiltonian is assembled from Kronecker products of cell shift
operators and 2x2 atom operators, diagonalized with the general
(non-symmetric) eigensolver, and observables are evaluated from explicit
operators and partial traces.  Used by the self-test for small chains.
"""

from __future__ import annotations

import numpy as np

from .lattice import Boundary, ChainParams

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
A_FROM_B = np.array([[0.0, 1.0], [0.0, 0.0]])  # |A><B|
B_FROM_A = A_FROM_B.T  # |B><A|


def shift(n_cells: int, periodic: bool) -> np.ndarray:
    """|m+1><m|."""
    s = np.zeros((n_cells, n_cells))
    for m in range(n_cells - 1):
        s[m + 1, m] = 1.0
    if periodic and n_cells > 1:
        s[0, n_cells - 1] = 1.0
    return s


def kron_hamiltonian(p: ChainParams) -> np.ndarray:
    n = p.n_cells
    t = shift(n, p.boundary is Boundary.PERIODIC)
    hw = np.kron(t, A_FROM_B)
    hz = np.kron(t, B_FROM_A)
    return p.v * np.kron(np.eye(n), SIGMA_X) + p.w * (hw + hw.T) + p.z * (hz + hz.T)


def eigensystem(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    evals, evecs = np.linalg.eig(h)
    order = np.argsort(evals.real, kind="stable")
    evecs = evecs[:, order].real
    evecs /= np.linalg.norm(evecs, axis=0)
    return evals.real[order], evecs


def schmidt_k(psi: np.ndarray, n_cells: int) -> float:
    full = np.outer(psi, psi.conj()).reshape(n_cells, 2, n_cells, 2)
    rho_atom = np.einsum("iaib->ab", full)
    return float(1.0 / np.trace(rho_atom @ rho_atom).real)


def x_expectation(psi: np.ndarray, n_cells: int) -> complex:
    """<psi| exp(i 2 pi x / N) |psi> with x = cell index."""
    x_op = np.kron(np.diag(np.arange(n_cells, dtype=float)), np.eye(2))
    big_x = np.diag(np.exp(2j * np.pi * np.diag(x_op) / n_cells))
    return complex(psi.conj() @ big_x @ psi)


def polarization(psi: np.ndarray, n_cells: int) -> float:
    return float(np.angle(x_expectation(psi, n_cells)) / (2 * np.pi))
