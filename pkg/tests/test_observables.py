import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import partial_trace_k, resta_x
from sshchain.lattice import ChainParams, build_hamiltonian, chiral_operator
from sshchain.observables import (
    PolarizationUndefined,
    bell_conditions,
    dimer_oracle,
    reduced_density_matrix,
    resta_polarization,
    schmidt_number_bloch,
    schmidt_number_explicit,
)
from sshchain.spectrum import EigenState, diagonalize


def normalized(vec):
    vec = np.asarray(vec, dtype=float)
    return EigenState(vec / np.linalg.norm(vec), 0.0)


def psi1(n, v, w, z=0.0):
    return diagonalize(build_hamiltonian(ChainParams(n, v, w, z))).state("psi1")


state_vectors = st.integers(2, 12).flatmap(
    lambda n: arrays(np.float64, 2 * n, elements=st.floats(-1, 1, allow_nan=False)).filter(
        lambda a: np.linalg.norm(a) > 1e-3
    )
)


@pytest.mark.parametrize("n, m0", [(5, 0), (5, 2), (5, 3), (8, 4), (10, 7)])
def test_polarization_of_localized_state(n, m0):
    amps = np.zeros(2 * n)
    amps[2 * m0] = 0.6
    amps[2 * m0 + 1] = 0.8
    p = resta_polarization(EigenState(amps, 0.0))
    expected = (m0 / n + 0.5) % 1.0 - 0.5
    if expected == -0.5:
        expected = 0.5
    assert p.value == pytest.approx(expected, abs=1e-12)
    assert p.value == pytest.approx(p.phase / (2 * math.pi))
    assert p.modulus == pytest.approx(1.0)


def test_polarization_branch_includes_half():
    amps = np.zeros(8)
    amps[4] = 1.0  # cell 2 of 4: exp(i pi)
    assert resta_polarization(EigenState(amps, 0.0)).value == 0.5


def test_polarization_ill_defined():
    with pytest.raises(PolarizationUndefined):
        resta_polarization(normalized([1, 0, 1, 0]))


def test_psi1_polarization_plateaus():
    assert abs(resta_polarization(psi1(40, 0.2, 0.5)).value) == pytest.approx(0.5, abs=0.05)
    assert resta_polarization(psi1(40, 0.8, 0.5)).value == pytest.approx(0.0, abs=0.05)


@settings(max_examples=50, deadline=None)
@given(state_vectors, st.integers(0, 20))
def test_polarization_shifts_under_translation(vec, shift):
    n = vec.size // 2
    state = normalized(vec)
    try:
        p0 = resta_polarization(state).value
    except PolarizationUndefined:
        return
    p1 = resta_polarization(normalized(np.roll(vec, 2 * shift))).value
    d = (p1 - p0 - shift / n) % 1.0
    assert min(d, 1 - d) < 1e-9


def test_polarization_matches_loop_oracle():
    rng = np.random.default_rng(5)
    for n in (3, 7, 20):
        vec = rng.normal(size=2 * n)
        vec /= np.linalg.norm(vec)
        x = resta_x(vec)
        assert resta_polarization(EigenState(vec, 0.0)).value == pytest.approx(math.atan2(x.imag, x.real) / (2 * math.pi))


def test_trivial_dimer_density_matrix():
    state, k, _ = dimer_oracle("trivial", +1)
    red = reduced_density_matrix(state)
    np.testing.assert_allclose(red.rho, 0.5 * np.ones((2, 2)), atol=1e-15)
    assert red.schmidt_k == pytest.approx(1.0, abs=1e-12) and k == 1.0


def test_topological_dimer_density_matrix():
    state, k, _ = dimer_oracle("topological", +1)
    red = reduced_density_matrix(state)
    np.testing.assert_allclose(red.rho, 0.5 * np.eye(2), atol=1e-15)
    assert red.schmidt_k == pytest.approx(2.0, abs=1e-12) and k == 2.0


def test_explicit_formula_random_n3():
    rng = np.random.default_rng(11)
    state = normalized(rng.normal(size=6))
    assert schmidt_number_explicit(state) == pytest.approx(reduced_density_matrix(state).schmidt_k, abs=1e-12)
    assert partial_trace_k(state.amplitudes) == pytest.approx(reduced_density_matrix(state).schmidt_k, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(state_vectors)
def test_schmidt_triangle_and_bounds(vec):
    state = normalized(vec)
    red = reduced_density_matrix(state)
    assert np.trace(red.rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(red.rho).min() >= -1e-12
    assert 1 - 1e-12 <= red.schmidt_k <= 2 + 1e-12
    assert red.schmidt_k == pytest.approx(schmidt_number_explicit(state), abs=1e-12)
    assert red.schmidt_k == pytest.approx(schmidt_number_bloch(red.bloch), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(state_vectors)
def test_schmidt_symmetries(vec):
    k = reduced_density_matrix(normalized(vec)).schmidt_k
    assert reduced_density_matrix(normalized(-vec)).schmidt_k == pytest.approx(k, abs=1e-12)
    # cell reflection with A <-> B swap reverses the flattened vector
    assert reduced_density_matrix(normalized(vec[::-1])).schmidt_k == pytest.approx(k, abs=1e-12)


def test_chiral_partner_shares_weights_and_k():
    spec = diagonalize(build_hamiltonian(ChainParams(30, 0.35, 0.5, 0.2)))
    gamma = chiral_operator(30)
    for i in (31, 40, 55):
        u = spec.state(i)
        gu = EigenState(gamma @ u.amplitudes, -u.energy)
        bu, bg = bell_conditions(u), bell_conditions(gu)
        assert (bu.sum_a, bu.sum_b) == pytest.approx((bg.sum_a, bg.sum_b), abs=1e-12)
        assert bg.overlap == pytest.approx(-bu.overlap, abs=1e-12)
        assert reduced_density_matrix(gu).schmidt_k == pytest.approx(reduced_density_matrix(u).schmidt_k, abs=1e-12)


def test_complex_amplitudes_use_hermitian_form():
    state = EigenState(np.array([1, 1j, 0, 0]) / math.sqrt(2), 0.0)
    red = reduced_density_matrix(state)
    np.testing.assert_allclose(red.rho, [[0.5, -0.5j], [0.5j, 0.5]])
    assert red.schmidt_k == pytest.approx(1.0)
    np.testing.assert_allclose(red.bloch, [0, 1, 0], atol=1e-15)


def test_bell_conditions_on_dimers():
    topo, _, _ = dimer_oracle("topological", +1)
    d = bell_conditions(topo)
    assert (d.sum_a, d.sum_b, d.overlap, d.is_hybrid_bell) == (pytest.approx(0.5), pytest.approx(0.5), 0.0, True)
    triv, _, _ = dimer_oracle("trivial", +1)
    d = bell_conditions(triv)
    assert (d.sum_a, d.sum_b, d.overlap) == (pytest.approx(0.5), pytest.approx(0.5), pytest.approx(0.5))
    assert not d.is_hybrid_bell


def test_psi1_is_hybrid_bell_at_transition_peak():
    # finite chains put the K maximum slightly below v = w
    vs = np.linspace(0.47, 0.5, 31)
    ks = [reduced_density_matrix(psi1(80, v, 0.5)).schmidt_k for v in vs]
    v_peak = vs[int(np.argmax(ks))]
    assert abs(v_peak - 0.5) <= 0.02
    assert bell_conditions(psi1(80, v_peak, 0.5), tol=0.05).is_hybrid_bell


@pytest.mark.parametrize("kind", ["trivial", "topological"])
@pytest.mark.parametrize("sign", [+1, -1])
def test_dimer_oracle_is_eigenstate(kind, sign):
    state, _, params = dimer_oracle(kind, sign, n_cells=5, cell=2)
    h = build_hamiltonian(params).matrix
    np.testing.assert_allclose(h @ state.amplitudes, sign * state.amplitudes, atol=1e-12)
    assert state.energy == sign


def test_topological_minus_dimer_layout():
    state, k, _ = dimer_oracle("topological", -1, n_cells=2)
    np.testing.assert_allclose(state.amplitudes, np.array([0, 1, -1, 0]) / math.sqrt(2))
    assert k == 2.0
