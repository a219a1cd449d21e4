"""Dimensionless scheme, error types and per-step trace records.

All solver-facing code works in dimensionless quantities: lengths are scaled
by the specimen length ``L`` and energies per unit area by the reference
toughness ``gamma``.  Physical units only appear at the I/O boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterator, List, Optional, Sequence

# Crack lengths are admissible on [0, A_MAX]; the specimen itself ends at 1.
A_MAX = 1.1
SPECIMEN_LENGTH = 1.0


class FractureError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(FractureError, ValueError):
    """A parameter violates its documented range."""


class DomainError(FractureError, ValueError):
    """A crack length lies outside the admissible interval."""


class DatasetExhaustedError(FractureError):
    """No data point is admissible (every abscissa lies behind the crack tip)."""


class BracketingError(FractureError, ValueError):
    """The initial crack length is not bracketed by the data set."""


class ScheduleMismatchError(FractureError, ValueError):
    """Two traces were computed on different load schedules."""


@dataclass(frozen=True)
class PhysicalParams:
    """Physical inputs of a DCB test (Table-1 style).

    Units only need to be consistent: with lengths in mm and forces in N,
    ``Y`` is in N/mm^2, ``C_M`` in mm/N and ``gamma`` in N/mm.
    """

    Y: float
    L: float
    h: float
    b: float
    a0: float
    deltaT: float
    C_M: float
    gamma: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidParameterError(f"{f.name} must be strictly positive, got {v!r}")
        if self.a0 >= self.L:
            raise InvalidParameterError(f"a0 ({self.a0}) must be smaller than L ({self.L})")


@dataclass(frozen=True)
class DimensionlessParams:
    hbar: float
    abar0: float
    bbar: float
    CMbar: float
    Ybar: float
    Lbar: float = 1.0

    def __post_init__(self):
        if self.Lbar != 1.0:
            raise InvalidParameterError("Lbar must be 1")
        for name in ("hbar", "bbar", "abar0"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise InvalidParameterError(f"{name} must lie in (0, 1), got {v!r}")
        if not self.Ybar > 0.0:
            raise InvalidParameterError(f"Ybar must be positive, got {self.Ybar!r}")
        if not self.CMbar >= 0.0:
            raise InvalidParameterError(f"CMbar must be non-negative, got {self.CMbar!r}")


def nondimensionalize(p: PhysicalParams) -> tuple[DimensionlessParams, float]:
    """Scale physical inputs to the dimensionless set.

    Returns
    -------
    params : DimensionlessParams
    deltaTbar : float
        Dimensionless load increment ``deltaT / L``.
    """
    if not isinstance(p, PhysicalParams):
        raise InvalidParameterError("expected PhysicalParams")
    params = DimensionlessParams(
        hbar=p.h / p.L,
        abar0=p.a0 / p.L,
        bbar=p.b / p.L,
        CMbar=p.C_M * p.gamma,
        Ybar=p.Y * p.L / p.gamma,
    )
    return params, p.deltaT / p.L


# Re-dimensionalization helpers, the inverse of the scaling above.
def length_to_physical(xbar: float, L: float) -> float:
    return xbar * L


def compliance_to_physical(cbar: float, gamma: float) -> float:
    return cbar / gamma


def modulus_to_physical(ybar: float, L: float, gamma: float) -> float:
    return ybar * gamma / L


def energy_to_physical(ebar: float, L: float, gamma: float) -> float:
    return ebar * gamma * L**2


def load_to_physical(pbar: float, L: float, gamma: float) -> float:
    # P = Delta / C  ->  Pbar = Deltabar / Cbar = P / (gamma L)
    return pbar * gamma * L


# Table-1 inputs (mm, N).
TABLE1 = PhysicalParams(Y=70000.0, L=30.0, h=3.0, b=1.0, a0=3.0, deltaT=1.5e-3, C_M=2e-3, gamma=0.06)


@dataclass(frozen=True)
class TraceStep:
    k: int
    DeltaT: float
    a: float
    Delta: float
    P: float
    G_DD: Optional[float] = None
    dissipative: bool = False
    failed: bool = False


@dataclass
class SolutionTrace:
    """Ordered per-load-step record of an incremental run."""

    steps: List[TraceStep] = field(default_factory=list)
    solver: str = ""
    dataset: str = ""
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[TraceStep]:
        return iter(self.steps)

    def __getitem__(self, i):
        return self.steps[i]

    def append(self, step: TraceStep) -> None:
        if self.steps and self.steps[-1].failed:
            raise FractureError("cannot append to a trace that ended in failure")
        self.steps.append(step)

    @property
    def failed(self) -> bool:
        return bool(self.steps) and self.steps[-1].failed

    @property
    def failure_step(self) -> Optional[int]:
        return self.steps[-1].k if self.failed else None

    def column(self, name: str) -> list:
        return [getattr(s, name) for s in self.steps]

    @property
    def a(self) -> list[float]:
        return self.column("a")

    @property
    def DeltaT(self) -> list[float]:
        return self.column("DeltaT")

    def with_metadata(self, **kw) -> "SolutionTrace":
        return replace(self, steps=list(self.steps), **kw)


def check_trace(trace: Sequence[TraceStep]) -> None:
    """Raise if ``trace`` violates irreversibility or the failure-is-last rule."""
    prev = -math.inf
    for i, s in enumerate(trace):
        if s.a < prev:
            raise FractureError(f"crack length decreased at step {s.k}: {prev} -> {s.a}")
        prev = s.a
        if s.failed and i != len(trace) - 1:
            raise FractureError(f"failed step {s.k} is not the last step")
