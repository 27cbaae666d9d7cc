"""Ground states (iterative, matvec-only) and canonical thermal states (dense)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import eigsh

from .errors import CapacityError, ConvergenceError
from .fock import SectorBasis
from .model import SparseHamiltonian, UnitSystem

DENSE_EIG_CUTOFF = 64      # below this, skip ARPACK and diagonalize densely
DEFAULT_THERMAL_CAP = 2000
DEGENERACY_GAP = 1e-10


@dataclass(eq=False)
class PureState:
    """Normalized state vector over a SectorBasis."""

    basis: SectorBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, "
                f"basis dimension is {self.basis.dim}"
            )
        nrm = np.linalg.norm(self.amplitudes)
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError(f"state norm {nrm} deviates from 1 by more than 1e-9")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(eq=False)
class DensityMatrix:
    """Hermitian, trace-one operator, either on a SectorBasis or a left x right product space."""

    matrix: np.ndarray
    basis: SectorBasis | None = None
    dims: tuple | None = None  # (dim_left, dim_right) for bipartite spaces

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)

    def validate(self, herm_tol=1e-12, trace_tol=1e-9, psd_tol=1e-10):
        m = self.matrix
        herm = np.max(np.abs(m - m.conj().T))
        if herm > herm_tol:
            raise ValueError(f"density matrix not Hermitian: max asymmetry {herm}")
        tr = abs(m.trace() - 1.0)
        if tr > trace_tol:
            raise ValueError(f"density matrix trace deviates from 1 by {tr}")
        lo = float(np.linalg.eigvalsh(m).min())
        if lo < -psd_tol:
            raise ValueError(f"density matrix has eigenvalue {lo} below -{psd_tol}")
        return self


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude amplitude real and positive."""
    pivot = vec[np.argmax(np.abs(vec))]
    if pivot == 0:
        return vec
    return vec * (abs(pivot) / pivot)


def ground_state(
    ham: SparseHamiltonian,
    J: float,
    U: float,
    tol: float = 1e-10,
    seed: int = 0,
) -> tuple:
    """Lowest eigenpair of H(J, U); returns (energy, PureState).

    Uses a Krylov eigensolver through matvec access for large sectors and a
    dense path below DENSE_EIG_CUTOFF.  The achieved residual ||H psi - E psi||
    is verified against ``tol``; the global phase is fixed by making the
    largest-magnitude amplitude real positive.  Deterministic for a fixed seed.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    dim = ham.dim
    if dim <= DENSE_EIG_CUTOFF:
        evals, evecs = np.linalg.eigh(ham.dense(J, U))
        energy, vec = float(evals[0]), evecs[:, 0]
    else:
        h = ham.matrix(J, U)
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(dim)
        try:
            evals, evecs = eigsh(h, k=1, which="SA", v0=v0, tol=0, maxiter=50 * dim)
        except Exception as exc:  # ArpackNoConvergence and friends
            raise ConvergenceError(f"ground-state eigensolver failed: {exc}") from exc
        energy, vec = float(evals[0]), evecs[:, 0]
    residual = float(np.linalg.norm(ham.matvec(J, U, vec) - energy * vec))
    if residual > tol:
        raise ConvergenceError(
            f"ground-state residual {residual} exceeds requested tolerance {tol}"
        )
    vec = _fix_phase(vec.astype(complex))
    return energy, PureState(basis=ham.basis, amplitudes=vec)


def thermal_state(
    ham: SparseHamiltonian,
    J: float,
    U: float,
    temperature_K: float,
    unit: UnitSystem,
    dense_cap: int = DEFAULT_THERMAL_CAP,
) -> DensityMatrix:
    """Canonical (fixed-N) thermal state exp(-H/k_B T)/Z via full eigendecomposition.

    At T = 0 returns the ground projector, with degenerate ground spaces
    (gap < 1e-10) mixed with equal weights.  Boltzmann factors are computed
    from energies shifted by the ground energy, so only excited-state weights
    can underflow; if they all do, the result silently equals the T = 0
    projector and a warning is emitted.
    """
    if temperature_K < 0:
        raise ValueError(f"temperature must be non-negative, got {temperature_K} K")
    dim = ham.dim
    if dim > dense_cap:
        raise CapacityError(
            f"thermal_state needs a dense eigendecomposition; dim {dim} exceeds cap {dense_cap}"
        )
    evals, evecs = np.linalg.eigh(ham.dense(J, U))
    if temperature_K == 0.0:
        weights = (evals - evals[0] <= DEGENERACY_GAP).astype(float)
    else:
        theta = temperature_K / unit.temp_scale_K  # k_B T in units of E_R
        weights = np.exp(-(evals - evals[0]) / theta)
        if weights[1:].max(initial=0.0) == 0.0:
            warnings.warn(
                "all excited-state Boltzmann weights underflowed; "
                "returning the ground projector",
                RuntimeWarning,
                stacklevel=2,
            )
    weights = weights / weights.sum()
    rho = (evecs * weights) @ evecs.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(matrix=rho, basis=ham.basis)


def spectral_gap(ham: SparseHamiltonian, J: float, U: float, seed: int = 0) -> float:
    """Gap between the two lowest eigenvalues (used to flag degenerate scans)."""
    dim = ham.dim
    if dim <= DENSE_EIG_CUTOFF:
        evals = np.linalg.eigvalsh(ham.dense(J, U))[:2]
    else:
        rng = np.random.default_rng(seed)
        evals = eigsh(
            ham.matrix(J, U), k=2, which="SA", v0=rng.standard_normal(dim), tol=0,
            return_eigenvectors=False, maxiter=50 * dim,
        )
        evals = np.sort(evals)
    return float(evals[1] - evals[0])
