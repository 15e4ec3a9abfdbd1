"""Diagonalization and state labelling.

Labels follow the chiral index: the 2N sorted eigenvalues split into N
negative and N positive partners.  Positive states are ``psi0``,
``psi1``, ... in ascending energy, negative partners carry a leading
minus (``-psi1``).  When the pair closest to zero is a pair of edge
modes, ``psi0``/``-psi0`` are renamed ``edge``/``-edge``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .lattice import ChainParams, HamiltonianMatrix, bond_matrix, chiral_operator

# Relative energy window inside which eigenvalues count as degenerate.
DEGENERACY_RTOL = 1e-10
# A candidate edge pair must sit below this fraction of the next level.
EDGE_GAP_RATIO = 0.1
# Fraction of weight an edge mode keeps in the outer quarters of the chain.
EDGE_WEIGHT_MIN = 0.75


class EigensolverError(RuntimeError):
    """The dense eigensolver failed to converge."""


class EdgeAmbiguityError(ValueError):
    """More than one pair of states sits at zero energy."""


@dataclass(frozen=True, eq=False)
class EigenState:
    amplitudes: np.ndarray
    energy: float

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if amps.ndim != 1 or amps.size % 2:
            raise ValueError("amplitudes must be a 1-D array of even length 2N")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_cells(self) -> int:
        return self.amplitudes.size // 2

    @property
    def a(self) -> np.ndarray:
        """Amplitudes on the A atoms, indexed by cell."""
        return self.amplitudes[0::2]

    @property
    def b(self) -> np.ndarray:
        return self.amplitudes[1::2]

    def cell_density(self) -> np.ndarray:
        return np.abs(self.a) ** 2 + np.abs(self.b) ** 2


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n_cells: int
    params: ChainParams | None = field(default=None)

    @cached_property
    def labels(self) -> dict[str, int]:
        return label_states(self)

    @property
    def has_edge_states(self) -> bool:
        return "edge" in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels[label]
        except KeyError:
            raise KeyError(f"no state labelled {label!r}") from None

    def state(self, label_or_index: str | int) -> EigenState:
        i = label_or_index if isinstance(label_or_index, (int, np.integer)) else self.index(label_or_index)
        return EigenState(self.eigenvectors[:, i].copy(), float(self.eigenvalues[i]))

    def label_of(self) -> list[str]:
        """Inverse of ``labels``: one label per column."""
        out = [""] * self.eigenvalues.size
        for name, i in self.labels.items():
            out[i] = name
        return out


def _fix_sign(u: np.ndarray) -> np.ndarray:
    mag = np.abs(u)
    top = mag.max()
    if top == 0.0:
        return u
    i = int(np.argmax(mag >= top * (1.0 - 1e-9)))
    return -u if u[i] < 0 else u


def _clusters(evals: np.ndarray, tol: float) -> list[range]:
    groups = []
    start = 0
    for i in range(1, evals.size + 1):
        if i == evals.size or evals[i] - evals[i - 1] > tol:
            groups.append(range(start, i))
            start = i
    return groups


def _resolve_with(vecs: np.ndarray, perturbations: list[np.ndarray], tol: float) -> np.ndarray:
    # first-order degenerate perturbation theory, one hopping family at a time
    if vecs.shape[1] < 2 or not perturbations:
        return vecs
    d = perturbations[0]
    m = vecs.T @ d @ vecs
    m = 0.5 * (m + m.T)
    mu, rot = np.linalg.eigh(m)
    vecs = vecs @ rot
    out = np.empty_like(vecs)
    for group in _clusters(mu, tol):
        cols = list(group)
        out[:, cols] = _resolve_with(vecs[:, cols], perturbations[1:], tol)
    return out


def _remix_zero_modes(vecs: np.ndarray) -> np.ndarray:
    # split the zero-energy pair into its A- and B-sublattice parts,
    # then recombine into the equal-weight (bonding, antibonding) pair
    n_cells = vecs.shape[0] // 2
    gamma = chiral_operator(n_cells)
    m = vecs.T @ gamma @ vecs
    _, rot = np.linalg.eigh(0.5 * (m + m.T))
    sub = vecs @ rot
    b_part = _fix_sign(sub[:, 0])
    a_part = _fix_sign(sub[:, 1])
    return np.column_stack([(a_part - b_part), (a_part + b_part)]) / np.sqrt(2.0)


def diagonalize(h: HamiltonianMatrix | np.ndarray) -> Spectrum:
    """Full eigendecomposition of a real symmetric chain Hamiltonian.

    Degenerate subspaces are given a reproducible basis.  A degenerate
    zero-energy pair is remixed into the equal-sublattice-weight
    combinations.  Other degenerate levels are resolved by first-order
    perturbation in the v, then w, then z bond operators, which selects
    the basis continuous with a small positive hopping.  Finally every
    eigenvector's largest-magnitude amplitude is made positive.
    """
    params = h.params if isinstance(h, HamiltonianMatrix) else None
    mat = np.asarray(h.matrix if isinstance(h, HamiltonianMatrix) else h, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
        raise ValueError(f"expected a square 2N x 2N matrix, got shape {mat.shape}")
    scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
    if np.abs(mat - mat.T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("Hamiltonian is not symmetric")

    try:
        evals, evecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver did not converge (LAPACK syevd): {exc}") from exc

    n_cells = mat.shape[0] // 2
    tol = DEGENERACY_RTOL * max(1.0, float(np.abs(evals).max(initial=0.0)))
    perturbations = []
    if params is not None:
        perturbations = [bond_matrix(n_cells, which, params.boundary) for which in ("v", "w", "z")]

    for group in _clusters(evals, tol):
        if len(group) < 2:
            continue
        cols = list(group)
        block = evecs[:, cols]
        if len(cols) == 2 and np.all(np.abs(evals[cols]) <= tol):
            evecs[:, cols] = _remix_zero_modes(block)
        else:
            evecs[:, cols] = _resolve_with(block, perturbations, tol)

    for i in range(evecs.shape[1]):
        evecs[:, i] = _fix_sign(evecs[:, i])
    return Spectrum(evals, evecs, n_cells, params)


def edge_weight(u: np.ndarray, n_cells: int) -> float:
    """Probability weight within the outer quarter of cells at each end."""
    dens = np.abs(u[0::2]) ** 2 + np.abs(u[1::2]) ** 2
    depth = max(1, n_cells // 4)
    return float(dens[:depth].sum() + dens[n_cells - depth:].sum()) if 2 * depth < n_cells else float(dens.sum())


def label_states(s: Spectrum, zero_tol: float | None = None) -> dict[str, int]:
    """Map labels to eigenvector columns.

    The pair nearest zero energy is an edge pair when it is end-localized
    (``edge_weight`` above ``EDGE_WEIGHT_MIN``) and either lies below
    ``zero_tol`` or, with the default ``zero_tol=None``, below
    ``1e-6*max|E|`` or below ``EDGE_GAP_RATIO`` times the next level.
    """
    n = s.n_cells
    evals = s.eigenvalues
    emax = float(np.abs(evals).max(initial=0.0))
    absolute = 1e-6 * emax if zero_tol is None else zero_tol
    n_zero = int(np.count_nonzero(np.abs(evals) <= absolute))
    if n_zero > 2:
        raise EdgeAmbiguityError(
            f"{n_zero} states within {absolute:.3g} of zero energy; edge pair is ambiguous"
        )

    is_edge = False
    if n >= 2:
        e0 = abs(evals[n])
        if zero_tol is None:
            near_zero = e0 <= absolute or e0 <= EDGE_GAP_RATIO * abs(evals[n + 1])
        else:
            near_zero = e0 < zero_tol
        if near_zero:
            is_edge = all(edge_weight(s.eigenvectors[:, i], n) >= EDGE_WEIGHT_MIN for i in (n - 1, n))

    labels: dict[str, int] = {}
    for j in range(n):
        name = "edge" if (j == 0 and is_edge) else f"psi{j}"
        labels[name] = n + j
        labels["-" + name] = n - 1 - j
    return labels


def energy_gap(s: Spectrum) -> float:
    """Smallest positive bulk energy (edge pair excluded when present)."""
    if s.n_cells < 2:
        raise ValueError("energy gap needs n_cells >= 2")
    i = s.n_cells + 1 if s.has_edge_states else s.n_cells
    return float(s.eigenvalues[i])
