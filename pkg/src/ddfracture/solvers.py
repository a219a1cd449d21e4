"""Single-step data-driven solvers.

Given the machine displacement of the current load step and the history
(crack length, and for the closest-point solver the current toughness
threshold), each solver picks the next crack length among the abscissae of a
resistance data set:

* :func:`global_step` minimizes ``E~ + F_R`` over the admissible points;
* :func:`cpp_step` separates elastic from dissipative steps and, when the
  crack grows, selects the point closest to the curve ``a -> G~(DeltaT, a)``;
* :func:`consistency_step` minimizes the violation of the complementarity
  condition over points that already satisfy ``G~ <= G_R``.

Irreversibility is enforced by only considering abscissae ``>= a_k``.  Exact
ties are broken in favour of the smallest abscissa.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .core import BracketingError, DatasetExhaustedError, InvalidParameterError
from .resistance import ResistanceDataSet
from .specimen import (MachineCoupling, SpecimenModel, energy_release_rate, energy_release_rate_slope,
                       equilibrium_split, reduced_energy)

# Coarse grid used to bracket the closest point on the G~ curve.
N_COARSE = 1024


@dataclass(frozen=True)
class SolverState:
    a_k: float
    G_R_k: Optional[float] = None


@dataclass(frozen=True)
class StepResult:
    a_next: float
    Delta: float
    P: float
    G_R_next: Optional[float] = None
    G_DD: Optional[float] = None
    dissipative: bool = False
    failed: bool = False
    distance: Optional[float] = None

    def next_state(self) -> SolverState:
        return SolverState(self.a_next, self.G_R_next)


@dataclass(frozen=True)
class CppConfig:
    """Closest-point projection settings.

    ``tol`` is the distance above which a dissipative step is flagged as
    unstable propagation.  ``None`` means ``tol_factor`` (7.5) times the mean
    gap between consecutive data set abscissae.
    """

    tol: Optional[float] = None
    accuracy: float = 1e-8
    tol_factor: float = 7.5

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0.0:
            raise InvalidParameterError("tol must be positive")
        if not self.accuracy > 0.0:
            raise InvalidParameterError("accuracy must be positive")

    def resolve_tol(self, dataset: ResistanceDataSet) -> float:
        if self.tol is not None:
            return self.tol
        return self.tol_factor * dataset.mean_spacing


def _admissible_start(sv_a: np.ndarray, a_k: float) -> int:
    return int(np.searchsorted(sv_a, a_k, side="left"))


def _finish(specimen, coupling, DeltaT, a_next, **kw) -> StepResult:
    Delta, P = equilibrium_split(specimen, coupling, DeltaT, a_next)
    return StepResult(a_next=float(a_next), Delta=Delta, P=P, **kw)


def global_step(state: SolverState, DeltaT: float, dataset: ResistanceDataSet,
                specimen: SpecimenModel, coupling: MachineCoupling) -> StepResult:
    """Discrete global minimization of ``E~(DeltaT, a_i) + F_i`` over ``a_i >= a_k``."""
    sv = dataset.sorted_view
    j0 = _admissible_start(sv.a, state.a_k)
    if j0 >= sv.a.size:
        raise DatasetExhaustedError(f"no data point with a >= {state.a_k}")
    a = sv.a[j0:]
    phi = np.asarray(reduced_energy(specimen, coupling, DeltaT, a)) + sv.F_R[j0:]
    i = int(np.argmin(phi))
    a_next = a[i]
    return _finish(specimen, coupling, DeltaT, a_next, dissipative=bool(a_next > state.a_k))


def _project_many(pa: np.ndarray, pg: np.ndarray, DeltaT: float, a_min: float,
                  specimen: SpecimenModel, coupling: MachineCoupling, accuracy: float,
                  prune: bool) -> tuple[np.ndarray, np.ndarray]:
    """Distances from points ``(pa, pg)`` to the curve ``G~(DeltaT, a)``, ``a >= a_min``.

    With ``prune`` set only the points that can still be the overall closest
    are refined; the others keep their coarse (upper-bound) distance.
    """
    a_hi = max(specimen.a_max, a_min)
    nodes = np.linspace(a_min, a_hi, N_COARSE)
    g = np.asarray(energy_release_rate(specimen, coupling, DeltaT, nodes))
    tree = cKDTree(np.column_stack([nodes, g]))
    d0, j = tree.query(np.column_stack([pa, pg]))
    a_star = nodes[j].astype(float)
    dist = d0.astype(float)
    if a_hi == a_min:
        return dist, a_star

    if prune:
        chord = float(np.max(np.hypot(np.diff(nodes), np.diff(g))))
        sel = np.flatnonzero(d0 - chord <= d0.min())
    else:
        sel = np.arange(pa.size)
    if sel.size == 0:
        return dist, a_star

    js = j[sel]
    lo = nodes[np.maximum(js - 1, 0)]
    hi = nodes[np.minimum(js + 1, N_COARSE - 1)]
    qa, qg = pa[sel], pg[sel]

    def dist_to(x):
        return np.hypot(qa - x, qg - np.asarray(energy_release_rate(specimen, coupling, DeltaT, x)))

    def stationarity(x, idx):
        # half the derivative of the squared distance along the curve
        g = np.asarray(energy_release_rate(specimen, coupling, DeltaT, x))
        dg = np.asarray(energy_release_rate_slope(specimen, coupling, DeltaT, x))
        return (x - qa[idx]) + (g - qg[idx]) * dg

    every = np.arange(sel.size)
    s_lo, s_hi = stationarity(lo, every), stationarity(hi, every)
    inner = np.flatnonzero((s_lo < 0.0) & (s_hi > 0.0))
    # without a sign change the bracket minimum sits on one of its ends
    x = np.where(dist_to(lo) <= dist_to(hi), lo, hi)
    blo, bhi = lo[inner], hi[inner]
    slo, shi = s_lo[inner], s_hi[inner]
    for _ in range(200):
        live = (bhi - blo) > accuracy * np.abs(bhi)
        if not np.any(live):
            break
        mid = 0.5 * (blo + bhi)
        smid = stationarity(mid, inner)
        neg = live & (smid < 0.0)
        pos = live & ~(smid < 0.0)
        blo, slo = np.where(neg, mid, blo), np.where(neg, smid, slo)
        bhi, shi = np.where(pos, mid, bhi), np.where(pos, smid, shi)
    # final secant step inside the bracket
    x[inner] = np.clip(blo - slo * (bhi - blo) / (shi - slo), blo, bhi)

    d_ref = dist_to(x)
    # the coarse node itself may still be better if the bracket is not unimodal
    better = d_ref < dist[sel]
    dist[sel] = np.where(better, d_ref, dist[sel])
    a_star[sel] = np.where(better, x, a_star[sel])
    return dist, a_star


def project_distance(point: tuple[float, float], DeltaT: float, a_min: float,
                     specimen: SpecimenModel, coupling: MachineCoupling,
                     accuracy: float = 1e-8) -> tuple[float, float]:
    """Constrained distance from ``(a_hat, G_hat)`` to the curve ``a -> G~(DeltaT, a)``.

    The curve is restricted to ``a_min <= a <= a_max``.  A coarse scan of
    ``N_COARSE`` nodes brackets the minimum; bisection on the stationarity
    condition then refines it to ``accuracy`` (relative, on the minimizer).

    Returns
    -------
    distance, a_star
    """
    if not a_min > 0.0:
        raise InvalidParameterError("a_min must be positive")
    d, x = _project_many(np.array([float(point[0])]), np.array([float(point[1])]),
                         DeltaT, a_min, specimen, coupling, accuracy, prune=False)
    return float(d[0]), float(x[0])


def cpp_step(state: SolverState, DeltaT: float, dataset: ResistanceDataSet,
             specimen: SpecimenModel, coupling: MachineCoupling,
             cfg: CppConfig = CppConfig()) -> StepResult:
    """Closest-point-projection step with elastic/dissipative split."""
    if state.G_R_k is None:
        raise InvalidParameterError("closest-point solver needs an initial G_R (see init_G_R0)")
    a_k = state.a_k
    g_k = float(energy_release_rate(specimen, coupling, DeltaT, a_k))
    if state.G_R_k > g_k:
        return _finish(specimen, coupling, DeltaT, a_k, G_R_next=state.G_R_k, G_DD=g_k)

    sv = dataset.sorted_view
    j0 = _admissible_start(sv.a, a_k)
    if j0 >= sv.a.size:
        # nothing left ahead of the tip: unstable propagation, no data point reached
        return _finish(specimen, coupling, DeltaT, a_k, G_R_next=state.G_R_k, G_DD=g_k, failed=True)
    pa, pg = sv.a[j0:], sv.G_R[j0:]
    dist, _ = _project_many(pa, pg, DeltaT, a_k, specimen, coupling, cfg.accuracy, prune=True)
    i = int(np.argmin(dist))
    d = float(dist[i])
    return _finish(specimen, coupling, DeltaT, pa[i], G_R_next=float(pg[i]), G_DD=float(pg[i]),
                   dissipative=True, failed=d > cfg.resolve_tol(dataset), distance=d)


def consistency_step(state: SolverState, DeltaT: float, dataset: ResistanceDataSet,
                     specimen: SpecimenModel, coupling: MachineCoupling) -> StepResult:
    """Best approximation of the complementarity condition over admissible points.

    Admissible points lie ahead of the crack tip and satisfy ``G~ <= G_R``.
    If none remains the step is flagged as unstable propagation.
    """
    a_k = state.a_k
    sv = dataset.sorted_view
    j0 = _admissible_start(sv.a, a_k)
    a = sv.a[j0:]
    gr = sv.G_R[j0:]
    if a.size:
        g = np.asarray(energy_release_rate(specimen, coupling, DeltaT, a))
        ok = np.flatnonzero(gr >= g)
    else:
        ok = np.empty(0, dtype=int)
    if ok.size == 0:
        return _finish(specimen, coupling, DeltaT, a_k, failed=True)
    obj = np.abs((g[ok] - gr[ok]) * (a_k - a[ok]))
    i = ok[int(np.argmin(obj))]
    a_next = a[i]
    return _finish(specimen, coupling, DeltaT, a_next, G_R_next=float(gr[i]),
                   dissipative=bool(a_next > a_k))


def init_G_R0(dataset: ResistanceDataSet, a0: float, variant: str = "average") -> float:
    """Initial toughness threshold for the closest-point solver.

    ``"average"`` returns the data value at ``a0`` when present, otherwise the
    mean of the two points immediately below and above ``a0``; ``"zero"``
    returns 0 and lets the first step propagate.
    """
    if variant == "zero":
        return 0.0
    if variant != "average":
        raise InvalidParameterError(f"unknown G_R0 rule {variant!r}")
    sv = dataset.sorted_view
    hit = np.flatnonzero(np.abs(sv.a - a0) <= 1e-12)
    if hit.size:
        return float(sv.G_R[hit[0]])
    j = int(np.searchsorted(sv.a, a0))
    if j == 0 or j >= sv.a.size:
        raise BracketingError(f"a0 = {a0} lies outside the data set abscissae")
    return 0.5 * float(sv.G_R[j - 1] + sv.G_R[j])


SOLVERS = ("global", "cpp", "consistency")
