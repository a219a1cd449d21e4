"""Classical solutions with an analytic resistance model.

These are the ground truth the data-driven traces are compared with:

* global minimization of ``Phi~ = E~ + F_R`` on an equispaced grid over the
  specimen length;
* local minimization (Kuhn-Tucker evolution).  When the current state loses
  stability the crack jumps to the nearest accessible local minimizer of
  ``Phi~`` ahead of the tip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SPECIMEN_LENGTH, InvalidParameterError
from .specimen import MachineCoupling, SpecimenModel, energy_release_rate, reduced_energy


@dataclass(frozen=True)
class ReferenceConfig:
    grid_size: int = 1000
    root_tol: float = 1e-10
    scan_step: float = 1e-3
    jump_rule: str = "nearest"

    def __post_init__(self):
        if self.grid_size < 2:
            raise InvalidParameterError("grid_size must be >= 2")
        if not (self.root_tol > 0.0 and self.scan_step > 0.0):
            raise InvalidParameterError("tolerances must be positive")
        if self.jump_rule != "nearest":
            raise InvalidParameterError(f"unsupported jump rule {self.jump_rule!r}")

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, SPECIMEN_LENGTH, self.grid_size)


def reduced_functional(model, specimen: SpecimenModel, coupling: MachineCoupling, DeltaT: float, a):
    """``Phi~(DeltaT, a) = E~(DeltaT, a) + F_R(a)``."""
    return np.asarray(reduced_energy(specimen, coupling, DeltaT, a)) + np.asarray(model.F_R(a, specimen.bbar))


def reference_global_step(a_k: float, DeltaT: float, model, specimen: SpecimenModel,
                          coupling: MachineCoupling, cfg: ReferenceConfig = ReferenceConfig()) -> float:
    """Grid argmin of ``Phi~`` over ``{a_k} U {grid nodes >= a_k}``.

    The current crack length is always a candidate so that an unloaded
    specimen stays put even when ``a_k`` is not a grid node.
    """
    grid = cfg.grid()
    cand = np.concatenate([[a_k], grid[grid >= a_k]])
    phi = reduced_functional(model, specimen, coupling, DeltaT, cand)
    return float(cand[int(np.argmin(phi))])


def _driving_excess(model, specimen, coupling, DeltaT, a):
    return np.asarray(energy_release_rate(specimen, coupling, DeltaT, a)) - np.asarray(model.G_R(a))


def reference_local_step(a_k: float, DeltaT: float, model, specimen: SpecimenModel,
                         coupling: MachineCoupling, cfg: ReferenceConfig = ReferenceConfig()) -> float:
    """Local (Kuhn-Tucker) evolution of the crack over one load step.

    Returns ``a_k`` when ``G~ <= G_R`` at the tip.  Otherwise ``Phi~`` decreases
    ahead of the tip and the crack advances to the first point where
    ``G~ - G_R`` turns non-positive: a root on a stable branch for continuous
    growth, or the landing point of a jump.  A return value of
    ``SPECIMEN_LENGTH`` means no arrest is possible within the specimen.
    """
    if DeltaT == 0.0 or _driving_excess(model, specimen, coupling, DeltaT, a_k) <= 0.0:
        return a_k
    n = max(int(np.ceil((SPECIMEN_LENGTH - a_k) / cfg.scan_step)), 1)
    nodes = np.minimum(a_k + cfg.scan_step * np.arange(n + 1), SPECIMEN_LENGTH)
    f = _driving_excess(model, specimen, coupling, DeltaT, nodes)
    hits = np.flatnonzero(f <= 0.0)
    if hits.size == 0:
        return SPECIMEN_LENGTH
    j = int(hits[0])
    lo, hi = float(nodes[j - 1]), float(nodes[j])
    # bisection keeping G~ > G_R at lo
    while hi - lo > cfg.root_tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _driving_excess(model, specimen, coupling, DeltaT, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    # a toughness jump inside the final bracket is where the crack stops
    for b in getattr(model, "breaks", ()):
        if lo <= b < hi:
            return float(b)
    return lo


REFERENCE_SOLVERS = ("ref-global", "ref-local")
