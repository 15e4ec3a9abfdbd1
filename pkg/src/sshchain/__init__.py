"""Finite SSH chains with first- and second-neighbour hopping: spectra,
Resta polarization, winding numbers and atom-cell entanglement."""

__version__ = "0.1.0"

from .lattice import Boundary, ChainParams, HamiltonianMatrix, build_hamiltonian, chiral_operator  # noqa: E402
from .spectrum import EigenState, Spectrum, diagonalize, energy_gap, label_states  # noqa: E402
from .kspace import band_energy, bloch_vector, winding_analytic, winding_numeric  # noqa: E402
from .observables import (  # noqa: E402
    bell_conditions,
    dimer_oracle,
    reduced_density_matrix,
    resta_polarization,
    schmidt_number,
)

__all__ = [
    "Boundary",
    "ChainParams",
    "HamiltonianMatrix",
    "build_hamiltonian",
    "chiral_operator",
    "EigenState",
    "Spectrum",
    "diagonalize",
    "energy_gap",
    "label_states",
    "band_energy",
    "bloch_vector",
    "winding_analytic",
    "winding_numeric",
    "bell_conditions",
    "dimer_oracle",
    "reduced_density_matrix",
    "resta_polarization",
    "schmidt_number",
]
