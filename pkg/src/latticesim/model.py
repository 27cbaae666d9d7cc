"""Physical lattice parameters, recoil units, Hubbard couplings, the
time-dependent lattice-depth drive and the sparse Bose-Hubbard operator.

Unit conventions
----------------
Internally all energies are measured in recoil energies E_R and time in
hbar/E_R, so hbar = 1 inside the dynamics.  Everything crossing the library
boundary is SI: lengths in m, times in s, temperatures in K.  All frequencies
everywhere are angular (rad/s); in particular the drive frequency satisfies
omega = U/hbar, which is dimensionally an angular frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants, sparse

from .errors import ScheduleRangeError
from .fock import SectorBasis, apply_hop

HBAR = constants.hbar
K_B = constants.k
ATOMIC_MASS_KG = constants.atomic_mass

RB87_MASS_U = 86.909  # rubidium-87


@dataclass(frozen=True)
class PhysicalParams:
    """Optical-lattice setup: laser, atom, mean depths and the drive program.

    Depths are in units of the recoil energy E_R.  ``omega_rad_s = None``
    selects resonant driving at U/hbar evaluated at the mean depth.
    """

    wavelength_m: float = 842e-9
    a_s_m: float = 5.45e-9
    mass_kg: float = RB87_MASS_U * ATOMIC_MASS_KG
    V_Er: float = 10.0
    V_perp_Er: float = 30.0
    dV: float = 0.2
    omega_rad_s: float | None = None

    def __post_init__(self):
        for name in ("wavelength_m", "a_s_m", "mass_kg", "V_Er", "V_perp_Er"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.dV < 0:
            raise ValueError(f"dV must be non-negative, got {self.dV}")
        if self.omega_rad_s is not None and self.omega_rad_s < 0:
            raise ValueError(f"omega_rad_s must be non-negative, got {self.omega_rad_s}")

    def with_offsets(self, **deltas) -> "PhysicalParams":
        """A copy with the given fields shifted additively (for robustness scans)."""
        updates = {k: getattr(self, k) + dv for k, dv in deltas.items()}
        return replace(self, **updates)


@dataclass(frozen=True)
class UnitSystem:
    """Derived scales of the lattice: E_R and its frequency/time/temperature forms."""

    recoil_energy_J: float
    freq_scale_rad_s: float  # E_R / hbar
    time_unit_s: float       # hbar / E_R
    temp_scale_K: float      # E_R / k_B


def recoil_units(params: PhysicalParams) -> UnitSystem:
    """Recoil energy E_R = hbar^2 k^2 / 2m with k = 2 pi / lambda, plus derived scales."""
    k = 2.0 * math.pi / params.wavelength_m
    e_r = HBAR**2 * k**2 / (2.0 * params.mass_kg)
    return UnitSystem(
        recoil_energy_J=e_r,
        freq_scale_rad_s=e_r / HBAR,
        time_unit_s=HBAR / e_r,
        temp_scale_K=e_r / K_B,
    )


@dataclass(frozen=True)
class HubbardCouplings:
    """Hopping J and on-site interaction U, both in units of E_R."""

    J: float
    U: float

    @property
    def u_over_j(self) -> float:
        return self.U / self.J


def hubbard_couplings(v0_er: float, v_perp_er: float, params: PhysicalParams) -> HubbardCouplings:
    """Deep-lattice coupling maps.

    J/E_R = (4/sqrt(pi)) (V0/E_R)^(3/4) exp(-2 sqrt(V0/E_R))
    U/E_R = sqrt(8/pi) k a_s (V0 V_perp^2 / E_R^3)^(1/4)
    """
    if v0_er <= 0 or v_perp_er <= 0:
        raise ValueError(f"lattice depths must be positive, got V0={v0_er}, V_perp={v_perp_er}")
    k = 2.0 * math.pi / params.wavelength_m
    j = 4.0 / math.sqrt(math.pi) * v0_er**0.75 * math.exp(-2.0 * math.sqrt(v0_er))
    u = math.sqrt(8.0 / math.pi) * k * params.a_s_m * (v0_er * v_perp_er**2) ** 0.25
    return HubbardCouplings(J=j, U=u)


def resonant_omega(params: PhysicalParams) -> float:
    """Drive frequency U/hbar in rad/s, evaluated at the mean depth."""
    unit = recoil_units(params)
    u = hubbard_couplings(params.V_Er, params.V_perp_Er, params).U
    return u * unit.freq_scale_rad_s


def drive_omega(params: PhysicalParams) -> float:
    """The configured drive frequency, defaulting to the resonant U/hbar."""
    if params.omega_rad_s is not None:
        return params.omega_rad_s
    return resonant_omega(params)


@dataclass(frozen=True)
class DriveSegment:
    """One piece of the lattice-depth program: V0(t) = V (1 + dV sin(omega (t - t_phase)))."""

    t_start_s: float
    t_end_s: float
    v_base_er: float
    dv: float = 0.0
    omega_rad_s: float = 0.0
    phase_origin_s: float = 0.0

    def __post_init__(self):
        if self.t_end_s <= self.t_start_s:
            raise ValueError(f"segment must have t_start < t_end, got [{self.t_start_s}, {self.t_end_s}]")
        if self.v_base_er <= 0:
            raise ValueError(f"segment depth must be positive, got {self.v_base_er}")
        if self.dv < 0:
            raise ValueError(f"segment dV must be non-negative, got {self.dv}")
        if self.dv >= 1.0:
            raise ValueError(f"dV = {self.dv} would drive the depth through zero")

    @property
    def driven(self) -> bool:
        return self.dv > 0.0 and self.omega_rad_s > 0.0

    def v0(self, t_s: float) -> float:
        if not self.driven:
            return self.v_base_er
        return self.v_base_er * (1.0 + self.dv * math.sin(self.omega_rad_s * (t_s - self.phase_origin_s)))


@dataclass(frozen=True)
class DriveSchedule:
    """Contiguous, non-overlapping sequence of drive segments."""

    segments: tuple

    def __post_init__(self):
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        for a, b in zip(self.segments, self.segments[1:]):
            if not math.isclose(a.t_end_s, b.t_start_s, rel_tol=0.0, abs_tol=1e-15):
                raise ValueError(
                    f"segments must be contiguous: gap between t={a.t_end_s} and t={b.t_start_s}"
                )

    @property
    def t_start_s(self) -> float:
        return self.segments[0].t_start_s

    @property
    def t_end_s(self) -> float:
        return self.segments[-1].t_end_s

    def segment_at(self, t_s: float) -> DriveSegment:
        if not (self.t_start_s <= t_s <= self.t_end_s):
            raise ScheduleRangeError(
                f"t = {t_s} s outside schedule span [{self.t_start_s}, {self.t_end_s}] s"
            )
        for seg in self.segments:
            if t_s < seg.t_end_s:
                return seg
        return self.segments[-1]


def v0_at(schedule: DriveSchedule, t_s: float) -> float:
    """Lattice depth at time t (s); raises ScheduleRangeError outside the span."""
    return schedule.segment_at(t_s).v0(t_s)


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    """Bose-Hubbard operator in a fixed sector, split for time-dependent rescaling.

    ``hop`` is the sparse matrix of -sum_l (a_l^dag a_{l+1} + h.c.) -- the minus
    sign is already inside -- and ``int_diag`` the diagonal of
    (1/2) sum_l n_l (n_l - 1), so H(J, U) = J * hop + U * diag(int_diag).
    """

    basis: SectorBasis
    hop: sparse.csr_matrix = field(repr=False)
    int_diag: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def matvec(self, J: float, U: float, v: np.ndarray) -> np.ndarray:
        return J * (self.hop @ v) + (U * self.int_diag) * v

    def matrix(self, J: float, U: float) -> sparse.csr_matrix:
        return (J * self.hop + sparse.diags(U * self.int_diag)).tocsr()

    def dense(self, J: float, U: float) -> np.ndarray:
        return self.matrix(J, U).toarray()

    def norm_bound(self, J: float, U: float) -> float:
        """Cheap upper bound on the spectral norm of H(J, U) (Gershgorin)."""
        return abs(J) * self._hop_row_norm + abs(U) * float(self.int_diag.max(initial=0.0))

    @property
    def _hop_row_norm(self) -> float:
        return float(np.abs(self.hop).sum(axis=1).max())


def build_hamiltonian(basis: SectorBasis) -> SparseHamiltonian:
    """Assemble hopping and interaction parts once; couplings are applied later."""
    dim = basis.dim
    int_diag = np.array(
        [sum(n * (n - 1) for n in s) / 2.0 for s in basis.states], dtype=float
    )
    rows, cols, vals = [], [], []
    for r, s in enumerate(basis.states):
        for l in range(basis.L - 1):
            for frm, to in ((l, l + 1), (l + 1, l)):
                if s[frm] == 0:
                    continue
                target, amp = apply_hop(s, frm, to)
                rows.append(basis.index[target])
                cols.append(r)
                vals.append(-amp)
    hop = sparse.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    int_diag.flags.writeable = False
    return SparseHamiltonian(basis=basis, hop=hop, int_diag=int_diag)
