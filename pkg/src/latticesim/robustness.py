"""Sensitivity of the prepared entangled state to experimental imperfections:
fidelity scans over one parameter at a time, peak widths (FWHM), the
Gaussian timing-ensemble mixed state and its small-variance Taylor fit."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .entanglement import PostselectedState, negativity, postselect
from .errors import CoverageError, NoCrossingError, QuadratureConvergenceError
from .fock import BipartiteIndexer
from .model import drive_omega
from .propagate import Trajectory
from .protocol import DriveProtocol, balanced_indexer, run_protocol, extended_drive_schedule
from .spectral import DensityMatrix

SCAN_PARAMETERS = ("t", "V", "V_perp", "dV", "omega")
DEFAULT_QUADRATURE_NODES = 41


@dataclass(eq=False)
class ScanCurve:
    """Values of one observable against additive offsets of one parameter."""

    parameter: str
    offsets: np.ndarray
    values: np.ndarray
    nominal: float

    def __post_init__(self):
        self.offsets = np.asarray(self.offsets, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.offsets) <= 0):
            raise ValueError("scan offsets must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("scan values must be finite")


GAUSSIAN_SPAN_SIGMAS = 6.0  # truncation: mass outside +-6 sigma is ~2e-9


@dataclass(frozen=True)
class GaussianEnsemble:
    """Symmetric quadrature discretization of a Gaussian distribution of stop times."""

    t0_s: float
    tau_s: float
    node_times_s: np.ndarray
    node_weights: np.ndarray


def gaussian_ensemble(t0_s: float, tau_s: float, nodes: int) -> GaussianEnsemble:
    """Gaussian-weighted uniform (trapezoid) nodes over t0 +- 6 tau.

    The node count must resolve the fastest oscillation of the evolving state
    within the window; the doubling check in gaussian_mixed_state verifies
    this empirically.  Weights are normalized to unit mass.
    """
    if nodes < 1:
        raise ValueError("need at least one quadrature node")
    if tau_s == 0.0 or nodes == 1:
        return GaussianEnsemble(
            t0_s=t0_s, tau_s=tau_s,
            node_times_s=np.array([t0_s]), node_weights=np.array([1.0]),
        )
    # centered integer grid: exactly antisymmetric for either parity
    u = np.arange(nodes) - (nodes - 1) / 2.0
    x = u * (2.0 * GAUSSIAN_SPAN_SIGMAS / (nodes - 1))
    w = np.exp(-0.5 * x**2)
    w /= w.sum()
    return GaussianEnsemble(
        t0_s=t0_s, tau_s=tau_s, node_times_s=t0_s + tau_s * x, node_weights=w
    )


def workers_from_env(default: int | None = None) -> int:
    env = os.environ.get("LATTICESIM_THREADS")
    if env:
        return max(1, int(env))
    if default is not None:
        return default
    return os.cpu_count() or 1


def nominal_postselected(proto: DriveProtocol, accuracy: float | None = 1e-8) -> PostselectedState:
    """The balanced-sector state at the end of the driven stage."""
    traj = run_protocol(proto, [proto.t0_s], accuracy=accuracy)
    indexer = balanced_indexer(proto.L, proto.N)
    return postselect(traj.states[-1], indexer)


def _scan_point(args):
    proto, parameter, offset = args
    perturbed = proto.perturbed(parameter, offset)
    traj = run_protocol(perturbed, [proto.t0_s], accuracy=None)
    indexer = balanced_indexer(proto.L, proto.N)
    return postselect(traj.states[-1], indexer)


def fidelity_scan(
    proto: DriveProtocol,
    parameter: str,
    offsets,
    nominal: PostselectedState | None = None,
    workers: int | None = None,
    nominal_accuracy: float | None = 1e-8,
) -> ScanCurve:
    """Fidelity between the nominal state at t0 and the state prepared with
    one perturbed parameter, for every offset.

    Timing offsets shift only the moment the drive stops, so the whole curve
    comes from a single trajectory sampled at t0 + offset.  The other
    parameters re-run the protocol per offset (concurrently); those passes
    reuse the step size validated by the nominal run's convergence check.
    The offset-0 point is the state against itself and is recorded as exactly 1.
    """
    if parameter not in SCAN_PARAMETERS:
        raise ValueError(f"parameter must be one of {SCAN_PARAMETERS}, got {parameter!r}")
    offsets = np.asarray(offsets, dtype=float)
    indexer = balanced_indexer(proto.L, proto.N)

    if parameter == "t":
        times = proto.t0_s + offsets
        if np.any(times <= 0):
            raise ValueError("timing offsets reach t <= 0")
        schedule = extended_drive_schedule(proto, float(times.max()) + 1e-12)
        sample = np.unique(np.concatenate([times, [proto.t0_s]]))
        traj = run_protocol(proto, sample, accuracy=nominal_accuracy, schedule=schedule)
        nom = postselect(traj.at(proto.t0_s), indexer)
        values = []
        for off, t in zip(offsets, times):
            if off == 0.0:
                values.append(1.0)
            else:
                values.append(_fidelity(nom, postselect(traj.at(t), indexer)))
        return ScanCurve(parameter="t", offsets=offsets, values=np.array(values),
                         nominal=proto.t0_s)

    if nominal is None:
        nominal = nominal_postselected(proto, accuracy=nominal_accuracy)
    jobs = [(proto, parameter, float(off)) for off in offsets if off != 0.0]
    n_workers = min(workers_from_env(workers), max(1, len(jobs)))
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            states = list(pool.map(_scan_point, jobs, chunksize=1))
    else:
        states = [_scan_point(j) for j in jobs]
    by_offset = dict(zip((j[2] for j in jobs), states))
    values = np.array([
        1.0 if off == 0.0 else _fidelity(nominal, by_offset[float(off)])
        for off in offsets
    ])
    nominal_value = {
        "V": proto.params.V_Er,
        "V_perp": proto.params.V_perp_Er,
        "dV": proto.params.dV,
        "omega": drive_omega(proto.params),
    }[parameter]
    return ScanCurve(parameter=parameter, offsets=offsets, values=values, nominal=nominal_value)


def _fidelity(a: PostselectedState, b: PostselectedState) -> float:
    return float(abs(np.vdot(a.coeffs, b.coeffs)) ** 2)


def fwhm(curve: ScanCurve) -> float:
    """Full width at half maximum of the central peak at offset 0.

    The half-maximum crossings nearest to 0 on each side are located by
    linear interpolation; a grid that never reaches half maximum on one side
    raises NoCrossingError.
    """
    offs, vals = curve.offsets, curve.values
    hits = np.nonzero(offs == 0.0)[0]
    if hits.size == 0:
        raise ValueError("scan grid must contain offset 0")
    i0 = int(hits[0])
    peak = vals[i0]
    if (i0 > 0 and vals[i0 - 1] > peak) or (i0 + 1 < len(vals) and vals[i0 + 1] > peak):
        raise ValueError("curve is not peaked at offset 0")
    half = peak / 2.0

    def first_crossing(indices):
        prev = i0
        for i in indices:
            if vals[i] < half:
                # linear interpolation between prev (>= half) and i (< half)
                x0, x1 = offs[prev], offs[i]
                y0, y1 = vals[prev], vals[i]
                return x0 + (half - y0) * (x1 - x0) / (y1 - y0)
            prev = i
        raise NoCrossingError(
            f"{curve.parameter} grid never crosses half maximum on one side"
        )

    right = first_crossing(range(i0 + 1, len(vals)))
    left = first_crossing(range(i0 - 1, -1, -1))
    return float(right - left)


def suggested_nodes(tau_s: float, base: int = DEFAULT_QUADRATURE_NODES) -> int:
    """Node count whose spacing (~0.015 ms over +-6 tau) resolves the state's
    fastest oscillations; never below ``base``."""
    n = max(base, int(np.ceil(tau_s / 1e-3 * 800)))
    return n if n % 2 == 1 else n + 1


def gaussian_node_times(t0_s: float, tau_s: float, nodes: int) -> np.ndarray:
    """Snapshot times needed by gaussian_mixed_state, including the doubled set."""
    a = gaussian_ensemble(t0_s, tau_s, nodes).node_times_s
    b = gaussian_ensemble(t0_s, tau_s, 2 * nodes).node_times_s
    return np.unique(np.concatenate([a, b, [t0_s]]))


def gaussian_mixed_state(
    traj: Trajectory,
    indexer: BipartiteIndexer,
    t0_s: float,
    tau_s: float,
    nodes: int = DEFAULT_QUADRATURE_NODES,
    negativity_change_tol: float = 1e-4,
    check: bool = True,
) -> DensityMatrix:
    """Mixed state of Gaussian-distributed drive durations around t0.

    rho(tau) = sum_k w_k |psi'(t_k)><psi'(t_k)| over normalized postselected
    states at the ensemble's node times; the trajectory must carry snapshots
    at exactly those times (gaussian_node_times lists them).  With ``check``
    on, the node count is doubled and the negativity must move by less than
    ``negativity_change_tol``; the doubled-node state is returned.
    """
    if tau_s < 0:
        raise ValueError("tau must be non-negative")
    if nodes < 21:
        raise ValueError("use at least 21 quadrature nodes")
    if tau_s > 0:
        lo, hi = t0_s - 5 * tau_s, t0_s + 5 * tau_s
        tmin, tmax = traj.sample_times_s.min(), traj.sample_times_s.max()
        if tmin > lo + 1e-12 or tmax < hi - 1e-12:
            raise CoverageError(
                f"trajectory [{tmin}, {tmax}] s does not cover [{lo}, {hi}] s"
            )
    if tau_s == 0.0:
        ps = postselect(traj.at(t0_s), indexer)
        return ps.density()

    def assemble(n):
        ens = gaussian_ensemble(t0_s, tau_s, n)
        d = indexer.dims[0] * indexer.dims[1]
        rho = np.zeros((d, d), dtype=complex)
        for t, w in zip(ens.node_times_s, ens.node_weights):
            v = postselect(traj.at(t), indexer).vector()
            rho += w * np.outer(v, v.conj())
        rho /= rho.trace().real
        return DensityMatrix(matrix=rho, dims=indexer.dims)

    rho_n = assemble(nodes)
    if not check:
        return rho_n
    rho_2n = assemble(2 * nodes)
    change = abs(negativity(rho_2n) - negativity(rho_n))
    if change > negativity_change_tol:
        raise QuadratureConvergenceError(
            f"doubling quadrature nodes ({nodes} -> {2 * nodes}) moved the "
            f"negativity by {change}"
        )
    return rho_2n


def taylor_fit(curve: ScanCurve, tau_max: float = 0.02):
    """Least-squares fit N = n0 + c2 tau^2 on the small-tau points.

    The linear term is constrained to zero (the curve is stationary at
    tau = 0).  Offsets are used in the curve's own units; feed a curve in ms
    to obtain c2 per ms^2.  Requires at least 4 points with tau <= tau_max.
    """
    mask = curve.offsets <= tau_max
    if mask.sum() < 4:
        raise ValueError(
            f"need at least 4 points with tau <= {tau_max}, got {int(mask.sum())}"
        )
    t2 = curve.offsets[mask] ** 2
    design = np.column_stack([np.ones_like(t2), t2])
    coef, *_ = np.linalg.lstsq(design, curve.values[mask], rcond=None)
    return float(coef[0]), float(coef[1])
