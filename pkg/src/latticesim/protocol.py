"""The standard driven-lattice experiment: prepare the static ground state,
modulate the lattice depth for a fixed duration, optionally hold and then
raise the depth to freeze the dynamics.  Robustness scans perturb one knob of
this protocol at a time."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

from .entanglement import balanced_n_left
from .fock import enumerate_basis, split_sector
from .model import (
    DriveSchedule,
    DriveSegment,
    PhysicalParams,
    build_hamiltonian,
    drive_omega,
    hubbard_couplings,
    recoil_units,
)
from .propagate import DEFAULT_STATIC_STEP, DEFAULT_STEPS_PER_PERIOD, evolve
from .spectral import ground_state


@dataclass(frozen=True)
class DriveProtocol:
    """Driven stage of duration t0 starting from the static ground state.

    The post-drive stages (hold at the mean depth, then freeze at a larger
    depth) only matter for full time traces; scans compare states at the end
    of the driven stage.
    """

    params: PhysicalParams
    L: int
    N: int
    t0_s: float = 0.100
    hold_s: float = 0.050
    freeze_s: float = 0.050
    freeze_depth_er: float = 30.0
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD
    static_step: float = DEFAULT_STATIC_STEP

    def perturbed(self, parameter: str, offset: float) -> "DriveProtocol":
        """Shift one experimental knob: 'V', 'V_perp', 'dV' or 'omega'.

        Depth and confinement offsets act on preparation and driving alike (a
        miscalibrated lattice is miscalibrated throughout); drive amplitude
        and frequency only exist during the driven stage.  Timing offsets are
        handled by sampling, not by this method.
        """
        if offset == 0.0:
            return self
        p = self.params
        if parameter == "V":
            p = p.with_offsets(V_Er=offset)
        elif parameter == "V_perp":
            p = p.with_offsets(V_perp_Er=offset)
        elif parameter == "dV":
            p = p.with_offsets(dV=offset)
        elif parameter == "omega":
            omega0 = drive_omega(self.params)
            p = replace(p, omega_rad_s=omega0 + offset)
        else:
            raise ValueError(f"unknown scan parameter {parameter!r}")
        return replace(self, params=p)


@lru_cache(maxsize=32)
def build_system(L: int, N: int):
    """(basis, hamiltonian) for the sector, cached across protocol runs."""
    basis = enumerate_basis(L, N)
    return basis, build_hamiltonian(basis)


@lru_cache(maxsize=64)
def balanced_indexer(L: int, N: int, mirror: bool = False):
    basis, _ = build_system(L, N)
    n_left = balanced_n_left(N)
    if mirror:
        n_left = N - n_left
    return split_sector(basis, n_left)


def drive_schedule(proto: DriveProtocol, until_s: float | None = None) -> DriveSchedule:
    """The protocol's depth program, truncated at ``until_s`` when given.

    Stages: driven [0, t0], hold at the mean depth [t0, t0+hold], freeze at
    the raised depth afterwards.  Both depth changes are instantaneous
    parameter quenches.
    """
    p = proto.params
    hold_end = proto.t0_s + proto.hold_s
    full_end = hold_end + proto.freeze_s
    t_end = full_end if until_s is None else until_s
    if t_end > full_end + 1e-12:
        raise ValueError(f"until_s = {until_s} extends beyond the protocol end {full_end}")
    segments = [DriveSegment(0.0, min(t_end, proto.t0_s), p.V_Er, p.dV, drive_omega(p), 0.0)]
    if t_end > proto.t0_s:
        segments.append(DriveSegment(proto.t0_s, min(t_end, hold_end), p.V_Er))
    if t_end > hold_end:
        segments.append(DriveSegment(hold_end, t_end, proto.freeze_depth_er))
    return DriveSchedule(segments=tuple(segments))


def extended_drive_schedule(proto: DriveProtocol, t_end_s: float) -> DriveSchedule:
    """A schedule that keeps driving until ``t_end_s`` (> or < t0).

    Models an imperfect stop time: the modulation simply continues with its
    original phase until the perturbed stop.
    """
    p = proto.params
    return DriveSchedule(segments=(
        DriveSegment(0.0, t_end_s, p.V_Er, p.dV, drive_omega(p), 0.0),
    ))


def prepare_ground(proto: DriveProtocol, tol: float = 1e-10, seed: int = 0):
    """Static ground state at the protocol's mean depth: (energy, state)."""
    _, ham = build_system(proto.L, proto.N)
    c = hubbard_couplings(proto.params.V_Er, proto.params.V_perp_Er, proto.params)
    return ground_state(ham, c.J, c.U, tol=tol, seed=seed)


def run_protocol(
    proto: DriveProtocol,
    sample_times_s,
    accuracy: float | None = 1e-8,
    schedule: DriveSchedule | None = None,
):
    """Evolve the prepared ground state and snapshot at the requested times."""
    _, ham = build_system(proto.L, proto.N)
    _, psi0 = prepare_ground(proto)
    unit = recoil_units(proto.params)
    if schedule is None:
        schedule = drive_schedule(proto, until_s=max(max(sample_times_s), 1e-9))
    return evolve(
        psi0, ham, schedule, unit, proto.params, sample_times_s,
        accuracy=accuracy,
        steps_per_period=proto.steps_per_period,
        static_step=proto.static_step,
    )
