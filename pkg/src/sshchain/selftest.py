"""Built-in consistency checks run by ``sshchain selftest``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import reference
from .kspace import SingularPointError, band_energy, winding_analytic, winding_from_hamiltonian, winding_numeric
from .lattice import Boundary, ChainParams, HamiltonianMatrix, build_hamiltonian, chiral_operator
from .observables import (
    PolarizationUndefined,
    dimer_oracle,
    reduced_density_matrix,
    resta_polarization,
    schmidt_number_bloch,
    schmidt_number_explicit,
)
from .spectrum import EigenState, diagonalize

Builder = Callable[[ChainParams], HamiltonianMatrix]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class SelfTestReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}" for c in self.checks]


def off_singular(rng: np.random.Generator, margin: float = 0.02) -> tuple[float, float, float]:
    """Uniform (v, w, z) in (0,1)^3 at least ``margin`` from v=w+z and w=z."""
    while True:
        v, w, z = rng.uniform(0.0, 1.0, 3)
        if abs(v - w - z) / math.sqrt(3) < margin:
            continue
        if v < w + z and abs(w - z) / math.sqrt(2) < margin:
            continue
        return float(v), float(w), float(z)


def check_dimers(builder: Builder) -> Check:
    worst_k = worst_e = 0.0
    for kind in ("trivial", "topological"):
        for sign in (+1, -1):
            state, k_exact, params = dimer_oracle(kind, sign, n_cells=4, cell=1)
            h = builder(params).matrix
            worst_e = max(worst_e, float(np.abs(h @ state.amplitudes - sign * state.amplitudes).max()))
            worst_k = max(worst_k, abs(reduced_density_matrix(state).schmidt_k - k_exact))
    ok = worst_k <= 1e-12 and worst_e <= 1e-12
    return Check("dimer oracles", ok, f"max |K-K_exact|={worst_k:.1e}, max |H psi - E psi|={worst_e:.1e}")


def check_chiral(builder: Builder, rng: np.random.Generator) -> Check:
    worst = 0.0
    exact = True
    for _ in range(20):
        v, w, z = rng.uniform(-1, 1, 3)
        for boundary in Boundary:
            p = ChainParams(int(rng.integers(2, 30)), v, w, z, boundary)
            h = builder(p).matrix
            g = chiral_operator(p.n_cells)
            exact &= bool(np.array_equal(g @ h @ g, -h))
            e = np.linalg.eigvalsh(h)
            worst = max(worst, float(np.abs(e + e[::-1]).max()))
    ok = exact and worst <= 1e-9
    return Check("chiral symmetry", ok, f"Gamma H Gamma = -H exact: {exact}; max |E_i + E_(2N-1-i)|={worst:.1e}")


def check_winding_methods(rng: np.random.Generator, samples: int = 200) -> Check:
    mismatches = 0
    for _ in range(samples):
        v, w, z = off_singular(rng)
        if winding_numeric(v, w, z, 1024).zeta != winding_analytic(v, w, z).zeta:
            mismatches += 1
    return Check("winding analytic vs numeric", mismatches == 0, f"{mismatches}/{samples} mismatches")


def check_winding_real_space(builder: Builder, rng: np.random.Generator, samples: int = 50) -> Check:
    mismatches = 0
    for _ in range(samples):
        v, w, z = off_singular(rng, margin=0.05)
        h = builder(ChainParams(12, v, w, z, Boundary.PERIODIC))
        try:
            zeta_rs = winding_from_hamiltonian(h).zeta
        except SingularPointError:
            mismatches += 1
            continue
        if zeta_rs != winding_analytic(v, w, z).zeta:
            mismatches += 1
    return Check(
        "winding consistency (real-space Bloch function vs closed form)",
        mismatches == 0,
        f"{mismatches}/{samples} mismatches",
    )


def check_schmidt_triangle(rng: np.random.Generator, samples: int = 300) -> Check:
    worst = 0.0
    bounds = True
    for i in range(samples):
        n = (2, 5, 50)[i % 3]
        psi = rng.normal(size=2 * n)
        state = EigenState(psi / np.linalg.norm(psi), 0.0)
        red = reduced_density_matrix(state)
        ks = (red.schmidt_k, schmidt_number_explicit(state), schmidt_number_bloch(red.bloch))
        worst = max(worst, max(ks) - min(ks))
        bounds &= 1 - 1e-12 <= red.schmidt_k <= 2 + 1e-12
    ok = worst <= 1e-12 and bounds
    return Check("Schmidt number formulas agree", ok, f"max spread={worst:.1e}, 1<=K<=2: {bounds}")


def check_brute_force(builder: Builder, rng: np.random.Generator, n_cells: int = 2) -> Check:
    worst = 0.0
    for _ in range(10):
        v, w, z = off_singular(rng, margin=0.05)
        p = ChainParams(n_cells, v, w, z)
        h_main = builder(p)
        spec = diagonalize(h_main)
        h_ref = reference.kron_hamiltonian(p)
        e_ref, u_ref = reference.eigensystem(h_ref)
        worst = max(worst, float(np.abs(h_main.matrix - h_ref).max()))
        worst = max(worst, float(np.abs(spec.eigenvalues - e_ref).max()))
        for i in range(2 * n_cells):
            state = spec.state(i)
            worst = max(worst, abs(reduced_density_matrix(state).schmidt_k - reference.schmidt_k(u_ref[:, i], n_cells)))
            x_ref = reference.x_expectation(u_ref[:, i], n_cells)
            try:
                dp = resta_polarization(state).value - reference.polarization(u_ref[:, i], n_cells)
                worst = max(worst, abs(dp - round(dp)))
            except PolarizationUndefined:
                # N=2 chains are inversion symmetric, so <X> = n_0 - n_1 = 0
                worst = max(worst, abs(x_ref))
    return Check(f"brute-force equivalence N={n_cells}", worst <= 1e-10, f"max deviation={worst:.1e}")


def check_periodic_bands(builder: Builder, rng: np.random.Generator) -> Check:
    worst = 0.0
    for _ in range(10):
        v, w, z = rng.uniform(0, 1, 3)
        n = int(rng.integers(3, 40))
        e = np.linalg.eigvalsh(builder(ChainParams(n, v, w, z, Boundary.PERIODIC)).matrix)
        _, eps = band_energy(v, w, z, 2 * np.pi * np.arange(n) / n)
        worst = max(worst, float(np.abs(e - np.sort(np.concatenate([-eps, eps]))).max()))
    return Check("periodic spectrum matches k-space bands", worst <= 1e-8, f"max deviation={worst:.1e}")


def run_selftest(builder: Builder = build_hamiltonian, seed: int = 20211101) -> SelfTestReport:
    rng = np.random.default_rng(seed)
    checks = [
        check_dimers(builder),
        check_chiral(builder, rng),
        check_winding_methods(rng),
        check_winding_real_space(builder, rng),
        check_schmidt_triangle(rng),
        check_brute_force(builder, rng, 2),
        check_brute_force(builder, rng, 3),
        check_periodic_bands(builder, rng),
    ]
    return SelfTestReport(checks)
