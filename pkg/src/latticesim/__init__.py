"""latticesim: exact simulation of driven Bose-Hubbard chains.

Enumerates number-conserving bosonic Fock sectors, assembles the Hubbard
operator from optical-lattice parameters, integrates the depth-modulated
dynamics, postselects balanced particle splits and quantifies the resulting
entanglement and its robustness to experimental imperfections.
"""

from .errors import (
    CapacityError,
    ConfigError,
    ConvergenceError,
    CoverageError,
    DegenerateProjectionError,
    NoCrossingError,
    QuadratureConvergenceError,
    ScheduleRangeError,
)
from .fock import (
    BipartiteIndexer,
    SectorBasis,
    apply_hop,
    enumerate_basis,
    sector_dimension,
    split_sector,
)
from .model import (
    DriveSchedule,
    DriveSegment,
    HubbardCouplings,
    PhysicalParams,
    SparseHamiltonian,
    UnitSystem,
    build_hamiltonian,
    drive_omega,
    hubbard_couplings,
    recoil_units,
    resonant_omega,
    v0_at,
)
from .spectral import DensityMatrix, PureState, ground_state, spectral_gap, thermal_state
from .propagate import IntegratorReport, Trajectory, evolve, expm_lanczos
from .entanglement import (
    PostselectedState,
    balanced_n_left,
    balanced_probability,
    entropy_of_entanglement,
    fidelity,
    negativity,
    partial_transpose,
    postselect,
    postselect_density,
    schmidt_negativity,
    sector_probability,
)
from .protocol import (
    DriveProtocol,
    balanced_indexer,
    build_system,
    drive_schedule,
    extended_drive_schedule,
    prepare_ground,
    run_protocol,
)
from .robustness import (
    GaussianEnsemble,
    ScanCurve,
    fidelity_scan,
    fwhm,
    gaussian_ensemble,
    gaussian_mixed_state,
    gaussian_node_times,
    nominal_postselected,
    suggested_nodes,
    taylor_fit,
)

__version__ = "0.1.0"
