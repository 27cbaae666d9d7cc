"""Postselection on the half-chain particle number and the entanglement
measures of the resulting bipartite states: entropy of entanglement (bits),
negativity, and state fidelity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProjectionError
from .fock import BipartiteIndexer
from .spectral import DensityMatrix, PureState

PROJECTION_FLOOR = 1e-12


@dataclass(eq=False)
class PostselectedState:
    """Coefficient matrix of a pure state projected onto one (n_left, n_right) sector.

    ``coeffs`` has shape (dim_left, dim_right) and unit Frobenius norm;
    ``probability`` is the weight the parent state carried in the sector.
    """

    indexer: BipartiteIndexer
    coeffs: np.ndarray
    probability: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != self.indexer.dims:
            raise ValueError(
                f"coefficient matrix shape {self.coeffs.shape} does not match "
                f"sector dims {self.indexer.dims}"
            )
        nrm = np.linalg.norm(self.coeffs)
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError(f"coefficient matrix norm {nrm} deviates from 1 by more than 1e-9")

    def vector(self) -> np.ndarray:
        """The state as a flat vector on the left x right product space."""
        return self.coeffs.ravel()

    def density(self) -> DensityMatrix:
        v = self.vector()
        return DensityMatrix(matrix=np.outer(v, v.conj()), dims=self.indexer.dims)


def sector_probability(psi: PureState, indexer: BipartiteIndexer) -> float:
    """Weight of ``psi`` inside the indexer's (n_left, n_right) sector."""
    sub = psi.amplitudes[indexer.parent_ranks]
    return float(np.vdot(sub, sub).real)


def postselect(psi: PureState, indexer: BipartiteIndexer) -> PostselectedState:
    """Project ``psi`` onto the sector and renormalize.

    Raises DegenerateProjectionError when the sector carries probability
    below 1e-12.
    """
    if indexer.parent is not psi.basis and (
        indexer.parent.L != psi.basis.L or indexer.parent.N != psi.basis.N
    ):
        raise ValueError("indexer was built for a different sector basis")
    sub = psi.amplitudes[indexer.parent_ranks]
    prob = float(np.vdot(sub, sub).real)
    if prob < PROJECTION_FLOOR:
        raise DegenerateProjectionError(
            f"postselection probability {prob} below {PROJECTION_FLOOR}"
        )
    d_l, d_r = indexer.dims
    coeffs = (sub / np.sqrt(prob)).reshape(d_l, d_r)
    return PostselectedState(indexer=indexer, coeffs=coeffs, probability=prob)


def postselect_density(rho: DensityMatrix, indexer: BipartiteIndexer):
    """Project a sector-basis density matrix onto the balanced cut.

    Returns ``(DensityMatrix on left x right, probability)`` where the
    probability is Tr(P rho P) before renormalization.
    """
    pr = indexer.parent_ranks
    block = rho.matrix[np.ix_(pr, pr)]
    prob = float(block.trace().real)
    if prob < PROJECTION_FLOOR:
        raise DegenerateProjectionError(
            f"postselection probability {prob} below {PROJECTION_FLOOR}"
        )
    out = DensityMatrix(matrix=block / prob, dims=indexer.dims)
    return out, prob


def entropy_of_entanglement(ps: PostselectedState) -> float:
    """Von Neumann entropy (base 2) of either reduced state of the postselected pure state."""
    sv = np.linalg.svd(ps.coeffs, compute_uv=False)
    p = sv**2
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log2(p)))


def schmidt_negativity(ps: PostselectedState) -> float:
    """Pure-state negativity ((sum of Schmidt coefficients)^2 - 1)/2, for cross-checks."""
    sv = np.linalg.svd(ps.coeffs, compute_uv=False)
    return float((sv.sum() ** 2 - 1.0) / 2.0)


def partial_transpose(rho: DensityMatrix) -> np.ndarray:
    """Transpose of the right tensor factor."""
    if rho.dims is None:
        raise ValueError("partial transpose needs a density matrix with bipartite dims")
    d_l, d_r = rho.dims
    m = rho.matrix.reshape(d_l, d_r, d_l, d_r)
    return m.transpose(0, 3, 2, 1).reshape(d_l * d_r, d_l * d_r)


def negativity(rho: DensityMatrix, route_tol: float = 1e-10) -> float:
    """Negativity (||rho^PT||_1 - 1)/2 with the right factor transposed.

    Evaluated as the sum of negative eigenvalue magnitudes of rho^PT; the
    trace-norm route is computed alongside and the two must agree within
    ``route_tol`` (they differ only through trace/eigensolve error).
    """
    evals = np.linalg.eigvalsh(partial_transpose(rho))
    from_negative = float(-evals[evals < 0].sum())
    from_trace_norm = float((np.abs(evals).sum() - 1.0) / 2.0)
    if abs(from_negative - from_trace_norm) > route_tol:
        raise ValueError(
            f"negativity routes disagree: {from_negative} vs {from_trace_norm} "
            f"(is the input trace-one Hermitian?)"
        )
    return from_negative


def fidelity(a: PostselectedState, b: PostselectedState) -> float:
    """Squared overlap |<a|b>|^2 of two postselected states on the same cut."""
    if not a.indexer.same_cut(b.indexer):
        raise ValueError("postselected states live on different bipartite cuts")
    return min(1.0, float(abs(np.vdot(a.coeffs, b.coeffs)) ** 2))


def balanced_n_left(N: int) -> int:
    """Left-half boson count of the most even split (floor(N/2) for odd N)."""
    return N // 2


def balanced_probability(psi: PureState, indexer: BipartiteIndexer, mirror_indexer=None) -> float:
    """Probability of the most even split.

    For odd N the experiment may accept either of the two mirror-image splits;
    passing the mirror indexer adds that sector's weight.
    """
    p = sector_probability(psi, indexer)
    if mirror_indexer is not None:
        p += sector_probability(psi, mirror_indexer)
    return p
