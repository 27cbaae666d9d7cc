import math

import numpy as np
import pytest

import latticesim as ls

from .properties import (
    check_local_unitary_invariance,
    check_negativity_dual_route,
    check_probability_completeness,
)


@pytest.fixture(scope="module")
def six_six():
    basis = ls.enumerate_basis(6, 6)
    return basis, ls.build_hamiltonian(basis), ls.split_sector(basis, 3)


def _fock_state(basis, occ):
    v = np.zeros(basis.dim, dtype=complex)
    v[basis.rank(occ)] = 1.0
    return ls.PureState(basis=basis, amplitudes=v)


def test_postselect_mott(six_six):
    basis, _, indexer = six_six
    ps = ls.postselect(_fock_state(basis, (1, 1, 1, 1, 1, 1)), indexer)
    assert ps.probability == pytest.approx(1.0, abs=1e-12)
    sv = np.linalg.svd(ps.coeffs, compute_uv=False)
    assert np.sum(sv > 1e-12) == 1  # rank one
    assert ls.entropy_of_entanglement(ps) == pytest.approx(0.0, abs=1e-12)


def test_postselect_condensate_is_product(six_six):
    basis, ham, indexer = six_six
    _, psi = ls.ground_state(ham, J=1.0, U=0.0)
    ps = ls.postselect(psi, indexer)
    assert ls.entropy_of_entanglement(ps) < 1e-8
    assert ls.negativity(ps.density()) < 1e-8


def test_postselect_zero_probability():
    basis = ls.enumerate_basis(2, 2)
    indexer = ls.split_sector(basis, 1)
    with pytest.raises(ls.DegenerateProjectionError):
        ls.postselect(_fock_state(basis, (2, 0)), indexer)


def test_postselect_density_pure_consistency(six_six):
    basis, ham, indexer = six_six
    _, psi = ls.ground_state(ham, J=1.0, U=27.8)
    ps = ls.postselect(psi, indexer)
    rho = ls.DensityMatrix(
        matrix=np.outer(psi.amplitudes, psi.amplitudes.conj()), basis=basis
    )
    projected, prob = ls.postselect_density(rho, indexer)
    assert prob == pytest.approx(ps.probability, rel=1e-12)
    assert np.max(np.abs(projected.matrix - ps.density().matrix)) < 1e-12


def test_postselect_density_maximally_mixed():
    basis = ls.enumerate_basis(2, 2)
    indexer = ls.split_sector(basis, 1)
    rho = ls.DensityMatrix(matrix=np.eye(3) / 3.0, basis=basis)
    projected, prob = ls.postselect_density(rho, indexer)
    assert prob == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert projected.matrix.shape == (1, 1)
    assert projected.matrix[0, 0] == pytest.approx(1.0, rel=1e-12)


def test_postselect_density_thermal_t0(six_six):
    basis, ham, indexer = six_six
    params = ls.PhysicalParams()
    unit = ls.recoil_units(params)
    c = ls.hubbard_couplings(10.0, 30.0, params)
    rho = ls.thermal_state(ham, c.J, c.U, 0.0, unit)
    projected, prob = ls.postselect_density(rho, indexer)
    _, psi = ls.ground_state(ham, c.J, c.U)
    ps = ls.postselect(psi, indexer)
    assert prob == pytest.approx(ps.probability, rel=1e-9)
    assert abs(ls.negativity(projected) - ls.schmidt_negativity(ps)) < 1e-9


def test_entropy_maximally_entangled(six_six):
    _, _, indexer = six_six
    coeffs = np.eye(10, dtype=complex) / math.sqrt(10.0)
    ps = ls.PostselectedState(indexer=indexer, coeffs=coeffs, probability=1.0)
    assert ls.entropy_of_entanglement(ps) == pytest.approx(math.log2(10.0), rel=1e-12)
    assert ls.negativity(ps.density()) == pytest.approx(4.5, rel=1e-10)


def test_entropy_ground_state_stays_small(six_six):
    basis, ham, indexer = six_six
    _, psi = ls.ground_state(ham, J=1.0, U=27.8)
    assert ls.entropy_of_entanglement(ls.postselect(psi, indexer)) <= 0.1


def test_negativity_bell_pair():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1.0 / math.sqrt(2.0)
    rho = ls.DensityMatrix(matrix=np.outer(bell, bell.conj()), dims=(2, 2))
    assert ls.negativity(rho) == pytest.approx(0.5, rel=1e-12)


def test_negativity_product_state():
    rng = np.random.default_rng(23)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho_l = a @ a.conj().T
    rho_l /= rho_l.trace()
    rho_r = b @ b.conj().T
    rho_r /= rho_r.trace()
    rho = ls.DensityMatrix(matrix=np.kron(rho_l, rho_r), dims=(3, 4))
    assert ls.negativity(rho) < 1e-12


def test_fidelity_contract(six_six):
    _, _, indexer = six_six
    rng = np.random.default_rng(5)
    c1 = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    c1 /= np.linalg.norm(c1)
    c2 = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    c2 /= np.linalg.norm(c2)
    a = ls.PostselectedState(indexer=indexer, coeffs=c1, probability=0.5)
    b = ls.PostselectedState(indexer=indexer, coeffs=c2, probability=0.5)
    assert ls.fidelity(a, a) == pytest.approx(1.0, abs=1e-12)
    assert ls.fidelity(a, b) == pytest.approx(ls.fidelity(b, a), abs=1e-15)
    # orthogonal coefficient matrices
    e1 = np.zeros((10, 10), dtype=complex)
    e1[0, 0] = 1.0
    e2 = np.zeros((10, 10), dtype=complex)
    e2[1, 1] = 1.0
    assert ls.fidelity(
        ls.PostselectedState(indexer=indexer, coeffs=e1, probability=1.0),
        ls.PostselectedState(indexer=indexer, coeffs=e2, probability=1.0),
    ) == 0.0


def test_fidelity_indexer_mismatch():
    basis = ls.enumerate_basis(6, 5)
    a = ls.postselect(_random_state(basis, 1), ls.split_sector(basis, 2))
    b = ls.postselect(_random_state(basis, 2), ls.split_sector(basis, 3))
    with pytest.raises(ValueError):
        ls.fidelity(a, b)


def _random_state(basis, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim)
    v /= np.linalg.norm(v)
    return ls.PureState(basis=basis, amplitudes=v)


def test_entropy_bounds_random(six_six):
    basis, _, indexer = six_six
    for seed in range(5):
        ps = ls.postselect(_random_state(basis, seed), indexer)
        e = ls.entropy_of_entanglement(ps)
        assert 0.0 <= e <= math.log2(10.0) + 1e-12


def test_balanced_helpers():
    assert ls.balanced_n_left(6) == 3
    assert ls.balanced_n_left(5) == 2
    basis = ls.enumerate_basis(6, 5)
    psi = _random_state(basis, 9)
    idx = ls.split_sector(basis, 2)
    mirror = ls.split_sector(basis, 3)
    total = ls.balanced_probability(psi, idx, mirror)
    assert total == pytest.approx(
        ls.sector_probability(psi, idx) + ls.sector_probability(psi, mirror), rel=1e-12
    )


def test_local_unitary_invariance_property():
    check_local_unitary_invariance(np.random.default_rng(31))


def test_negativity_dual_route_property():
    check_negativity_dual_route(np.random.default_rng(37))


def test_probability_completeness_property():
    check_probability_completeness(np.random.default_rng(41), 6, 6)
    check_probability_completeness(np.random.default_rng(43), 4, 5)
