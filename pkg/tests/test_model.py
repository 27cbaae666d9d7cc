import math

import numpy as np
import pytest

import latticesim as ls

from .properties import check_coupling_linearity, check_hermiticity

# Frozen values, computed by direct evaluation of the closed forms with
# scipy's CODATA constants (lambda = 842 nm, a_s = 5.45 nm, m = 86.909 u).
FREQ_SCALE = 20345.476619229863      # E_R / hbar in rad/s
TEMP_SCALE_NK = 155.40348241456454   # E_R / k_B in nK
J_AT_10 = 0.02273869722323636
U_AT_10_30 = 0.6321133515726669
J_AT_30 = 0.0005056713044716293


def test_recoil_units_reference_values():
    unit = ls.recoil_units(ls.PhysicalParams())
    assert unit.freq_scale_rad_s == pytest.approx(FREQ_SCALE, rel=1e-9)
    assert unit.temp_scale_K * 1e9 == pytest.approx(TEMP_SCALE_NK, rel=1e-9)
    assert unit.time_unit_s == pytest.approx(1.0 / FREQ_SCALE, rel=1e-12)
    assert unit.recoil_energy_J > 0


def test_recoil_scaling_with_wavelength():
    p1 = ls.PhysicalParams()
    p2 = ls.PhysicalParams(wavelength_m=2 * p1.wavelength_m)
    e1 = ls.recoil_units(p1).recoil_energy_J
    e2 = ls.recoil_units(p2).recoil_energy_J
    assert e2 == pytest.approx(e1 / 4.0, rel=1e-14)


def test_couplings_reference_depth():
    params = ls.PhysicalParams()
    c = ls.hubbard_couplings(10.0, 30.0, params)
    assert c.J == pytest.approx(J_AT_10, rel=1e-12)
    assert c.U == pytest.approx(U_AT_10_30, rel=1e-12)
    assert c.u_over_j == pytest.approx(27.799013521615436, rel=1e-12)
    # the resonance frequency quoted for this setup is 12862 rad/s
    assert ls.resonant_omega(params) == pytest.approx(12862.0, rel=0.005)
    assert ls.resonant_omega(params) == pytest.approx(12860.647415, rel=1e-9)


def test_couplings_deep_lattice():
    c = ls.hubbard_couplings(30.0, 30.0, ls.PhysicalParams())
    assert c.J == pytest.approx(J_AT_30, rel=1e-12)
    assert c.J < J_AT_10 / 40  # the depth raise freezes hopping


def test_couplings_validation():
    with pytest.raises(ValueError):
        ls.hubbard_couplings(-1.0, 30.0, ls.PhysicalParams())


def test_drive_omega_override():
    assert ls.drive_omega(ls.PhysicalParams(omega_rad_s=5.0)) == 5.0
    default = ls.drive_omega(ls.PhysicalParams())
    assert default == pytest.approx(12860.647415, rel=1e-6)


def test_v0_at_examples():
    omega = 2.0 * math.pi * 1000.0
    seg = ls.DriveSegment(0.0, 1.0, 10.0, 0.2, omega, 0.0)
    schedule = ls.DriveSchedule(segments=(seg,))
    assert ls.v0_at(schedule, 0.0) == 10.0
    quarter = (math.pi / 2.0) / omega
    assert ls.v0_at(schedule, quarter) == pytest.approx(12.0, rel=1e-12)
    static = ls.DriveSchedule(segments=(ls.DriveSegment(0.0, 1.0, 7.5),))
    assert ls.v0_at(static, 0.3) == 7.5


def test_v0_out_of_range():
    schedule = ls.DriveSchedule(segments=(ls.DriveSegment(0.0, 1.0, 10.0),))
    with pytest.raises(ls.ScheduleRangeError):
        ls.v0_at(schedule, 2.0)


def test_drive_positivity():
    seg = ls.DriveSegment(0.0, 1.0, 10.0, 0.95, 300.0, 0.0)
    schedule = ls.DriveSchedule(segments=(seg,))
    for t in np.linspace(0.0, 1.0, 1001):
        assert ls.v0_at(schedule, float(t)) > 0.0


def test_drive_amplitude_bound():
    with pytest.raises(ValueError):
        ls.DriveSegment(0.0, 1.0, 10.0, 1.0, 300.0, 0.0)


def test_schedule_contiguity():
    with pytest.raises(ValueError):
        ls.DriveSchedule(segments=(
            ls.DriveSegment(0.0, 1.0, 10.0),
            ls.DriveSegment(1.5, 2.0, 10.0),
        ))


def test_hamiltonian_two_sites_one_boson():
    ham = ls.build_hamiltonian(ls.enumerate_basis(2, 1))
    assert np.allclose(ham.hop.toarray(), [[0.0, -1.0], [-1.0, 0.0]])
    assert np.allclose(ham.int_diag, [0.0, 0.0])
    j = 0.37
    evals = np.linalg.eigvalsh(ham.dense(j, 1.3))
    assert evals == pytest.approx([-j, j], rel=1e-14)


def test_hamiltonian_two_sites_two_bosons():
    basis = ls.enumerate_basis(2, 2)
    assert basis.states == ((2, 0), (1, 1), (0, 2))
    ham = ls.build_hamiltonian(basis)
    assert np.allclose(ham.int_diag, [1.0, 0.0, 1.0])
    dense = ham.hop.toarray()
    root2 = math.sqrt(2.0)
    expected = np.array([
        [0.0, -root2, 0.0],
        [-root2, 0.0, -root2],
        [0.0, -root2, 0.0],
    ])
    assert np.allclose(dense, expected)


def test_hamiltonian_int_diagonal():
    ham = ls.build_hamiltonian(ls.enumerate_basis(4, 4))
    # every entry is a sum of triangular numbers n(n-1)/2, hence a non-negative integer
    assert np.all(ham.int_diag >= 0)
    assert np.allclose(ham.int_diag, np.round(ham.int_diag))
    assert ham.int_diag[ham.basis.rank((4, 0, 0, 0))] == 6.0
    assert ham.int_diag[ham.basis.rank((1, 1, 1, 1))] == 0.0
    assert ham.int_diag[ham.basis.rank((2, 2, 0, 0))] == 2.0


def test_hermiticity_property():
    check_hermiticity(6, 6)
    check_hermiticity(5, 3)


def test_coupling_linearity_property():
    rng = np.random.default_rng(3)
    check_coupling_linearity(6, 6, rng)
    check_coupling_linearity(4, 2, rng)


def test_ground_energy_matches_dense_oracle():
    basis = ls.enumerate_basis(6, 6)
    ham = ls.build_hamiltonian(basis)
    c = ls.hubbard_couplings(10.0, 30.0, ls.PhysicalParams())
    energy, _ = ls.ground_state(ham, c.J, c.U)
    oracle = np.linalg.eigvalsh(ham.dense(c.J, c.U))[0]
    assert abs(energy - oracle) <= 1e-10 * abs(oracle)


def test_norm_bound_dominates():
    ham = ls.build_hamiltonian(ls.enumerate_basis(4, 3))
    rng = np.random.default_rng(5)
    j, u = 0.7, 2.1
    bound = ham.norm_bound(j, u)
    for _ in range(5):
        v = rng.standard_normal(ham.dim)
        v /= np.linalg.norm(v)
        assert np.linalg.norm(ham.matvec(j, u, v)) <= bound + 1e-12
