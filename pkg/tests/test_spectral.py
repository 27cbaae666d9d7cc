import numpy as np
import pytest

import latticesim as ls


@pytest.fixture(scope="module")
def params():
    return ls.PhysicalParams()


@pytest.fixture(scope="module")
def unit(params):
    return ls.recoil_units(params)


def test_two_site_single_boson_ground():
    ham = ls.build_hamiltonian(ls.enumerate_basis(2, 1))
    j = 0.42
    energy, psi = ls.ground_state(ham, J=j, U=0.0)
    assert energy == pytest.approx(-j, abs=1e-12)
    assert np.allclose(psi.amplitudes, np.array([1.0, 1.0]) / np.sqrt(2.0), atol=1e-10)


def test_mott_limit_overlap():
    basis = ls.enumerate_basis(6, 6)
    ham = ls.build_hamiltonian(basis)
    _, psi = ls.ground_state(ham, J=1.0, U=1e4)
    mott = basis.rank((1, 1, 1, 1, 1, 1))
    assert abs(psi.amplitudes[mott]) ** 2 > 0.999


def test_ground_matches_dense_oracle_small():
    basis = ls.enumerate_basis(4, 4)  # dim 35 -> dense path
    ham = ls.build_hamiltonian(basis)
    c = ls.hubbard_couplings(10.0, 30.0, ls.PhysicalParams())
    energy, psi = ls.ground_state(ham, c.J, c.U)
    evals, evecs = np.linalg.eigh(ham.dense(c.J, c.U))
    assert abs(energy - evals[0]) <= 1e-10 * abs(evals[0])
    overlap = abs(np.vdot(evecs[:, 0], psi.amplitudes)) ** 2
    assert 1.0 - overlap < 1e-8


def test_ground_iterative_matches_dense(params):
    # dim 462 exercises the Krylov path; oracle stays the dense eigensolver
    basis = ls.enumerate_basis(6, 4)
    ham = ls.build_hamiltonian(basis)
    energy, psi = ls.ground_state(ham, J=1.0, U=7.3)
    evals, evecs = np.linalg.eigh(ham.dense(1.0, 7.3))
    assert abs(energy - evals[0]) <= 1e-10 * max(1.0, abs(evals[0]))
    assert 1.0 - abs(np.vdot(evecs[:, 0], psi.amplitudes)) ** 2 < 1e-8


def test_ground_residual_and_phase():
    ham = ls.build_hamiltonian(ls.enumerate_basis(6, 6))
    energy, psi = ls.ground_state(ham, J=1.0, U=27.8, tol=1e-10)
    residual = np.linalg.norm(ham.matvec(1.0, 27.8, psi.amplitudes) - energy * psi.amplitudes)
    assert residual <= 1e-10
    pivot = psi.amplitudes[np.argmax(np.abs(psi.amplitudes))]
    assert pivot.imag == pytest.approx(0.0, abs=1e-14)
    assert pivot.real > 0


def test_ground_deterministic():
    ham = ls.build_hamiltonian(ls.enumerate_basis(6, 5))
    e1, psi1 = ls.ground_state(ham, J=1.0, U=3.0, seed=0)
    e2, psi2 = ls.ground_state(ham, J=1.0, U=3.0, seed=0)
    assert e1 == e2
    assert np.array_equal(psi1.amplitudes, psi2.amplitudes)


def test_variational_bound():
    ham = ls.build_hamiltonian(ls.enumerate_basis(5, 4))
    energy, _ = ls.ground_state(ham, J=1.0, U=2.0)
    rng = np.random.default_rng(17)
    for _ in range(10):
        v = rng.standard_normal(ham.dim)
        v /= np.linalg.norm(v)
        rayleigh = v @ ham.matvec(1.0, 2.0, v)
        assert energy <= rayleigh + 1e-12


def test_thermal_zero_temperature_is_ground_projector(unit):
    ham = ls.build_hamiltonian(ls.enumerate_basis(4, 4))
    c = ls.hubbard_couplings(10.0, 30.0, ls.PhysicalParams())
    rho = ls.thermal_state(ham, c.J, c.U, 0.0, unit)
    rho.validate()
    _, psi = ls.ground_state(ham, c.J, c.U)
    expected = np.outer(psi.amplitudes, psi.amplitudes.conj())
    assert np.max(np.abs(rho.matrix - expected)) < 1e-10


def test_thermal_infinite_temperature(unit):
    ham = ls.build_hamiltonian(ls.enumerate_basis(4, 4))
    c = ls.hubbard_couplings(10.0, 30.0, ls.PhysicalParams())
    t_hot = 1e6 * unit.temp_scale_K
    rho = ls.thermal_state(ham, c.J, c.U, t_hot, unit)
    dim = ham.dim
    # trace distance to the maximally mixed state
    diff = np.linalg.eigvalsh(rho.matrix - np.eye(dim) / dim)
    assert 0.5 * np.abs(diff).sum() < 1e-3


def test_thermal_purity_monotone(unit):
    ham = ls.build_hamiltonian(ls.enumerate_basis(4, 4))
    c = ls.hubbard_couplings(10.0, 30.0, ls.PhysicalParams())
    temps = [0.0, 10e-9, 40e-9, 80e-9, 400e-9]
    purities = []
    for t in temps:
        rho = ls.thermal_state(ham, c.J, c.U, t, unit).validate()
        purities.append(float(np.real(np.trace(rho.matrix @ rho.matrix))))
    assert all(a >= b - 1e-12 for a, b in zip(purities, purities[1:]))


def test_thermal_dimension_cap(unit):
    ham = ls.build_hamiltonian(ls.enumerate_basis(6, 6))
    with pytest.raises(ls.CapacityError):
        ls.thermal_state(ham, 0.02, 0.6, 40e-9, unit, dense_cap=100)


def test_thermal_negative_temperature_rejected(unit):
    ham = ls.build_hamiltonian(ls.enumerate_basis(2, 2))
    with pytest.raises(ValueError):
        ls.thermal_state(ham, 1.0, 1.0, -1.0, unit)


def test_thermal_underflow_warns(unit):
    ham = ls.build_hamiltonian(ls.enumerate_basis(2, 2))
    with pytest.warns(RuntimeWarning):
        rho = ls.thermal_state(ham, 1.0, 1.0, 1e-30, unit)
    rho.validate()


def test_pure_state_norm_validation():
    basis = ls.enumerate_basis(2, 1)
    with pytest.raises(ValueError):
        ls.PureState(basis=basis, amplitudes=np.array([1.0, 1.0]))


def test_spectral_gap():
    ham = ls.build_hamiltonian(ls.enumerate_basis(2, 1))
    gap = ls.spectral_gap(ham, J=0.5, U=0.0)
    assert gap == pytest.approx(1.0, rel=1e-10)
