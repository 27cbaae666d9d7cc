"""Number-conserving bosonic Fock bases and the bipartite reindexing used for
postselection on the particle number of each half of the chain.

A basis element is an occupation vector: a tuple of per-site boson counts.
Bases are ordered lexicographically descending with site 0 most significant,
so the maximally stacked state (N, 0, ..., 0) has rank 0 and (0, ..., 0, N)
comes last.  All objects are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError

OccupationVector = tuple  # tuple of non-negative ints summing to the sector's N

DEFAULT_DIMENSION_CAP = 10_000_000


def sector_dimension(L: int, N: int) -> int:
    """Number of ways to place N bosons on L sites (stars and bars)."""
    return math.comb(N + L - 1, N)


def _descending_states(L, N):
    # Lexicographic descending enumeration, site 0 most significant.
    if L == 1:
        yield (N,)
        return
    for k in range(N, -1, -1):
        for rest in _descending_states(L - 1, N - k):
            yield (k,) + rest


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Ordered basis of all L-site, N-boson occupation vectors with O(1) rank lookup."""

    L: int
    N: int
    states: tuple
    index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def rank(self, state) -> int:
        try:
            return self.index[tuple(state)]
        except KeyError:
            raise KeyError(
                f"{tuple(state)} is not an occupation vector of the "
                f"(L={self.L}, N={self.N}) sector"
            ) from None

    def __len__(self) -> int:
        return len(self.states)

    def __repr__(self) -> str:
        return f"SectorBasis(L={self.L}, N={self.N}, dim={self.dim})"


def enumerate_basis(L: int, N: int, dimension_cap: int = DEFAULT_DIMENSION_CAP) -> SectorBasis:
    """Enumerate the full (L, N) sector in descending lexicographic order.

    Raises CapacityError if the sector dimension exceeds ``dimension_cap``
    before any state is materialized.
    """
    if L < 2:
        raise ValueError(f"need at least 2 sites, got L={L}")
    if N < 0:
        raise ValueError(f"boson number must be non-negative, got N={N}")
    dim = sector_dimension(L, N)
    if dim > dimension_cap:
        raise CapacityError(
            f"sector (L={L}, N={N}) has dimension {dim}, "
            f"exceeding the cap of {dimension_cap}"
        )
    states = tuple(_descending_states(L, N))
    index = {s: r for r, s in enumerate(states)}
    return SectorBasis(L=L, N=N, states=states, index=index)


def apply_hop(state, frm: int, to: int):
    """Move one boson between adjacent sites (0-based indices).

    Returns ``(new_state, amplitude)`` with amplitude
    sqrt(state[to] + 1) * sqrt(state[frm]), the matrix element of
    a_to^dag a_frm.  Annihilating an empty site is not an error: the input
    state is returned unchanged with amplitude 0.
    """
    if abs(frm - to) != 1:
        raise ValueError(f"hop must connect adjacent sites, got {frm} -> {to}")
    if not (0 <= frm < len(state) and 0 <= to < len(state)):
        raise ValueError(f"sites {frm} -> {to} outside chain of length {len(state)}")
    n_from = state[frm]
    if n_from == 0:
        return tuple(state), 0.0
    new = list(state)
    new[frm] -= 1
    new[to] += 1
    return tuple(new), math.sqrt(n_from * (state[to] + 1))


@dataclass(frozen=True, eq=False)
class BipartiteIndexer:
    """Reindexing of the balanced-cut subspace with n_left bosons on the left half.

    ``parent_ranks[i * dim_right + j]`` is the rank, in the parent basis, of the
    state whose left half is left_basis.states[i] and right half is
    right_basis.states[j].  The map is a bijection onto the product basis.
    """

    parent: SectorBasis
    n_left: int
    n_right: int
    left_basis: SectorBasis
    right_basis: SectorBasis
    parent_ranks: np.ndarray = field(repr=False)

    @property
    def dims(self):
        return self.left_basis.dim, self.right_basis.dim

    def mapping(self) -> dict:
        """Parent rank -> (left rank, right rank), materialized as a dict."""
        d_r = self.right_basis.dim
        return {
            int(pr): (k // d_r, k % d_r)
            for k, pr in enumerate(self.parent_ranks)
        }

    def same_cut(self, other: "BipartiteIndexer") -> bool:
        return (
            self.parent.L == other.parent.L
            and self.parent.N == other.parent.N
            and self.n_left == other.n_left
        )


def split_sector(basis: SectorBasis, n_left: int) -> BipartiteIndexer:
    """Index the subspace of ``basis`` with exactly n_left bosons on sites 0..L/2-1."""
    if basis.L % 2 != 0:
        raise ValueError(f"bipartite split needs an even site count, got L={basis.L}")
    if not 0 <= n_left <= basis.N:
        raise ValueError(f"n_left={n_left} outside [0, N={basis.N}]")
    half = basis.L // 2
    n_right = basis.N - n_left
    left = enumerate_basis(half, n_left) if half >= 2 else _short_basis(half, n_left)
    right = enumerate_basis(half, n_right) if half >= 2 else _short_basis(half, n_right)
    ranks = np.empty(left.dim * right.dim, dtype=np.int64)
    k = 0
    for sl in left.states:
        for sr in right.states:
            ranks[k] = basis.index[sl + sr]
            k += 1
    ranks.flags.writeable = False
    return BipartiteIndexer(
        parent=basis,
        n_left=n_left,
        n_right=n_right,
        left_basis=left,
        right_basis=right,
        parent_ranks=ranks,
    )


def _short_basis(L, N):
    # Single-site halves (L=2 chains) fall below enumerate_basis's L >= 2 contract.
    states = tuple(_descending_states(L, N))
    return SectorBasis(L=L, N=N, states=states, index={s: r for r, s in enumerate(states)})
