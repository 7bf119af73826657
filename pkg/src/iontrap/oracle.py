"""Ground-truth services the perturbative results are measured against.

Nothing in this module knows about the recursion or the printed formulas:
exact diagonalization, exact and time-ordered propagation, log-log slope
fitting, and anticrossing scans are all direct numerics.  Matching the
algebraically assembled frame-chain propagator against the time-ordered
integrator therefore validates the whole transformation chain without
any perturbation theory in the loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .operators import (
    SpaceConfig, Operator, basis_vector, op_norm,
    GROUND, EXCITED,
)
from .hamiltonians import ModelParams, bh, frame_rotation, t_delta


class OverlapAmbiguityError(RuntimeError):
    """Exact eigenvectors could not be matched to the requested pair."""


_HERM_TOL = 1e-10
# minimal squared projection onto span{|n-1,e>, |n,g>} for a confident match
_OVERLAP_THRESHOLD = 0.8

# Gauss-Legendre nodes of the order-4 Magnus step
_GAUSS_LO = 0.5 - math.sqrt(3.0) / 6.0
_GAUSS_HI = 0.5 + math.sqrt(3.0) / 6.0


# -- exact diagonalization and propagation -------------------------------------

def exact_eigs(h: Operator, herm_tol: float = _HERM_TOL):
    """Ascending eigenvalues and eigenvector matrix of a hermitian operator.

    The matrix is symmetrized as (H + H^dag)/2 before factorization;
    a hermiticity defect beyond herm_tol (relative to max(1, ||H||)) is a
    caller bug and is rejected rather than silently averaged away.
    """
    scale = max(1.0, op_norm(h))
    if op_norm(h - h.dag) > herm_tol * scale:
        raise ValueError("operator is not hermitian within tolerance")
    sym = 0.5 * (h.mat + h.mat.conj().T)
    values, vectors = np.linalg.eigh(sym)
    # factorization residual per pair; eigh leaves ~eps * ||H||
    worst = np.linalg.norm(sym @ vectors - vectors * values, axis=0).max()
    if worst > 1e-10 * scale:
        raise ArithmeticError(
            f"eigendecomposition residual {worst:.3e} exceeds 1e-10 * scale")
    return values, vectors


def exact_propagator(h: Operator, t: float) -> Operator:
    """expm(-i H t) through the eigendecomposition; unitary up to rounding."""
    values, vectors = exact_eigs(h)
    u = (vectors * np.exp(-1j * t * values)) @ vectors.conj().T
    return Operator(u, h.space)


def time_ordered_propagator(h_fn: Callable[[float], np.ndarray], t: float,
                            space: SpaceConfig, steps_per_unit: float = 200.0,
                            order: int = 2) -> Operator:
    """Propagator of a time-dependent Hamiltonian by uniform Magnus stepping.

    h_fn maps a time to the (hermitian) Hamiltonian matrix.  order=2
    exponentiates the midpoint Hamiltonian on each step (global error h^2);
    order=4 uses the two-point Gauss-Legendre rule with its commutator
    term (global error h^4, what the acceptance-grade comparisons use).
    The step count is ceil(steps_per_unit * |t|), at least one.
    """
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order}")
    if steps_per_unit <= 0:
        raise ValueError("steps_per_unit must be positive")
    steps = max(1, math.ceil(steps_per_unit * abs(t)))
    h_step = t / steps
    dim = 2 * (space.n_max + 1)
    u = np.eye(dim, dtype=np.complex128)
    for k in range(steps):
        t0 = k * h_step
        if order == 2:
            hm = np.asarray(h_fn(t0 + 0.5 * h_step))
            w, v = np.linalg.eigh(hm)
            u = (v * np.exp(-1j * h_step * w)) @ v.conj().T @ u
        else:
            h1 = np.asarray(h_fn(t0 + _GAUSS_LO * h_step))
            h2 = np.asarray(h_fn(t0 + _GAUSS_HI * h_step))
            omega = (-0.5j * h_step * (h1 + h2)
                     + (math.sqrt(3.0) / 12.0) * h_step * h_step
                     * (h1 @ h2 - h2 @ h1))
            # omega is anti-hermitian, so i*omega feeds eigh
            w, v = np.linalg.eigh(1j * omega)
            u = (v * np.exp(-1j * w)) @ v.conj().T @ u
    return Operator(u, space)


def frame_chain_propagator(t: float, p: ModelParams,
                           space: SpaceConfig) -> Operator:
    """Lab-frame propagator assembled algebraically, with no time ordering.

    The laser-frame rotation makes the generator static and the balanced
    transform relates it to the balanced Hamiltonian, so the lab propagator
    factorizes as R_t^dag T^dag e^{-i H_bal t} T.  Any disagreement with the
    time-ordered integrator falsifies one of the chain's links.
    """
    r = frame_rotation(t, p, space)
    td = t_delta(p, space)
    return r.dag @ td.dag @ exact_propagator(bh(p, space), t) @ td


# -- convergence-order fitting --------------------------------------------------

@dataclass(frozen=True)
class ConvergenceFit:
    """Least-squares power-law fit of residuals over a coupling grid.

    slope and intercept live in log-log coordinates; a fit only counts as
    conclusive when r_squared >= 0.95, below that the residual is not
    behaving like a power of the coupling and no order can be claimed.
    """

    lambdas: tuple
    residuals: tuple
    slope: float
    intercept: float
    r_squared: float

    def __post_init__(self):
        if len(self.lambdas) != len(self.residuals):
            raise ValueError("lambdas and residuals must align")
        if any(r <= 0 for r in self.residuals):
            raise ValueError("residuals must be strictly positive")

    @property
    def conclusive(self) -> bool:
        return self.r_squared >= 0.95


def fit_order(residual_fn: Callable[[float], float],
              grid: Sequence[float]) -> ConvergenceFit:
    """Fit residual_fn(lam) ~ lam^slope over the grid.

    The grid needs at least four strictly positive points.  A residual
    that is zero or negative is rejected: it signals exact cancellation,
    and the caller should shrink whatever tolerance produced it rather
    than have a logarithm invent an order.
    """
    lambdas = tuple(float(x) for x in grid)
    if len(lambdas) < 4:
        raise ValueError("need at least 4 grid points for a credible fit")
    if any(x <= 0 for x in lambdas):
        raise ValueError("grid must be strictly positive")
    residuals = tuple(float(residual_fn(x)) for x in lambdas)
    for x, r in zip(lambdas, residuals):
        if not (r > 0 and math.isfinite(r)):
            raise ValueError(
                f"residual {r!r} at lam={x!r} is not a positive number; "
                "exact cancellation, shrink the tolerance")
    lx = np.log(lambdas)
    ly = np.log(residuals)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ConvergenceFit(lambdas=lambdas, residuals=residuals,
                          slope=float(slope), intercept=float(intercept),
                          r_squared=r2)


# -- anticrossing scans ----------------------------------------------------------

@dataclass(frozen=True)
class GapScan:
    """Exact avoided-crossing gap over a detuning scan.

    detuning_offsets holds the scanned values of b = (delta_breve - nu)/2,
    the pair's diagonal splitting parameter; gaps the exact E_plus - E_minus
    of the tracked pair; argmin the parabola-refined location of the
    smallest gap in the same units.
    """

    detuning_offsets: tuple
    gaps: tuple
    argmin: float

    def __post_init__(self):
        if len(self.detuning_offsets) != len(self.gaps):
            raise ValueError("detuning_offsets and gaps must align")
        if any(g < 0 for g in self.gaps):
            raise ValueError("gaps are magnitudes; got a negative entry")


def _parabolic_argmin(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Vertex of the parabola through the three lowest points."""
    grid_best = xs[int(np.argmin(ys))]
    if len(xs) < 3:
        return grid_best
    pick = np.argsort(ys)[:3]
    x3 = np.asarray([xs[i] for i in pick], dtype=float)
    y3 = np.asarray([ys[i] for i in pick], dtype=float)
    if len(set(x3)) < 3:
        return grid_best
    a, b, _ = np.polyfit(x3, y3, 2)
    if not (math.isfinite(a) and a > 0):
        return grid_best
    vertex = -b / (2.0 * a)
    lo, hi = min(xs), max(xs)
    return min(max(vertex, lo), hi)


def scan_gap(n: int, p_base: ModelParams, offsets: Sequence[float],
             space: SpaceConfig | None = None) -> GapScan:
    """Exact gap of the n-th avoided pair as the detuning mismatch is swept.

    Each offset sets delta_breve = nu + 2*offset while the couplings lam
    and eta_breve keep their p_base values (the physical drive parameters
    are recomputed to match), so the scan moves only the pair's diagonal
    splitting.  Sweeping at fixed Rabi frequency instead would drag
    eta_breve along delta_breve and displace the gap minimum by
    ~lam^2 eta_breve n^2, swamping the effect being located.  Levels are
    matched to the pair by squared projection onto span{|n-1,e>, |n,g>};
    a projection under 0.8 is refused instead of guessed.
    """
    if n < 1:
        raise ValueError("the bottom level is unpaired; need n >= 1")
    if space is None:
        space = SpaceConfig()
    nu, lam, eta_b = p_base.nu, p_base.lam, p_base.eta_breve
    va = basis_vector(space, n - 1, EXCITED)
    vb = basis_vector(space, n, GROUND)
    gaps = []
    for off in offsets:
        db = nu + 2.0 * float(off)
        if db <= 0:
            raise ValueError(
                f"offset {float(off):g} drives delta_breve to {float(db):g} <= 0")
        p = ModelParams.from_balanced(nu, db, eta_b, lam)
        values, vectors = exact_eigs(bh(p, space))
        overlap = (np.abs(vectors.conj().T @ va) ** 2
                   + np.abs(vectors.conj().T @ vb) ** 2)
        pick = np.argsort(overlap)[-2:]
        if overlap[pick].min() < _OVERLAP_THRESHOLD:
            raise OverlapAmbiguityError(
                f"pair n={n}: projection {overlap[pick].min():.3f} < "
                f"{_OVERLAP_THRESHOLD} at offset {off!r}")
        lo, hi = sorted(values[pick])
        gaps.append(float(hi - lo))
    offs = tuple(float(x) for x in offsets)
    return GapScan(detuning_offsets=offs, gaps=tuple(gaps),
                   argmin=float(_parabolic_argmin(offs, gaps)))
