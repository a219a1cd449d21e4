"""Compliance models for DCB specimens and the energetics of machine loading.

A specimen of compliance ``C(a)`` is loaded in series with a linear machine of
compliance ``C_M`` under a prescribed total displacement ``DeltaT``.  Eliminating
the load gives the reduced elastic energy

    E~(DeltaT, a) = DeltaT^2 / (2 (C(a) + C_M))

and the energy release rate per unit thickness

    G~(DeltaT, a) = DeltaT^2 C'(a) / (2 b (C(a) + C_M)^2).

Every function accepts scalars or numpy arrays for ``a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import A_MAX, DimensionlessParams, DomainError, InvalidParameterError

ArrayLike = Union[float, np.ndarray]


def _as_crack(a, lo: float = 0.0, strict_lo: bool = False, hi: float = A_MAX):
    arr = np.asarray(a, dtype=float)
    bad = (arr <= lo) if strict_lo else (arr < lo)
    if np.any(bad | (arr > hi) | ~np.isfinite(arr)):
        raise DomainError(f"crack length outside admissible interval: {a!r}")
    return arr


def _out(x: np.ndarray, like) -> ArrayLike:
    return float(x) if np.ndim(like) == 0 else x


@dataclass(frozen=True)
class MachineCoupling:
    CMbar: float

    def __post_init__(self):
        if not (math.isfinite(self.CMbar) and self.CMbar >= 0.0):
            raise InvalidParameterError(f"CMbar must be >= 0, got {self.CMbar!r}")

    @classmethod
    def from_params(cls, params: DimensionlessParams) -> "MachineCoupling":
        return cls(params.CMbar)


@dataclass(frozen=True)
class StandardDCB:
    """Prismatic DCB, ``C(a) = 8 a^3 / (Y b h^3)``."""

    params: DimensionlessParams
    a_max: float = A_MAX

    kind = "standard-dcb"

    @property
    def bbar(self) -> float:
        return self.params.bbar

    @property
    def abar0(self) -> float:
        return self.params.abar0

    def _stiffness(self) -> float:
        p = self.params
        return p.Ybar * p.bbar * p.hbar**3

    def compliance(self, a: ArrayLike) -> ArrayLike:
        arr = _as_crack(a, hi=self.a_max)
        return _out(8.0 * arr**3 / self._stiffness(), a)

    def compliance_derivative(self, a: ArrayLike) -> ArrayLike:
        arr = _as_crack(a, hi=self.a_max)
        return _out(24.0 * arr**2 / self._stiffness(), a)

    def compliance_second_derivative(self, a: ArrayLike) -> ArrayLike:
        arr = _as_crack(a, hi=self.a_max)
        return _out(48.0 * arr / self._stiffness(), a)

    def energy_release_rate_closed_form(self, CMbar: float, DeltaT: float, a: ArrayLike) -> ArrayLike:
        """Closed-form ``G~`` of the prismatic DCB with machine compliance."""
        arr = _as_crack(a, strict_lo=True, hi=self.a_max)
        p = self.params
        yh3 = p.Ybar * p.hbar**3
        g = 12.0 * arr**2 * yh3 * (DeltaT / (8.0 * arr**3 + CMbar * yh3 * p.bbar)) ** 2
        return _out(g, a)


@dataclass(frozen=True)
class TaperedDCB:
    """DCB whose arm height varies linearly over a transition zone.

    The arm height is ``h1`` up to ``L1``, ``p + m x`` on ``(L1, L1 + LT]`` and
    ``h2`` beyond, with ``p = h1 - m L1``.  Shear and the deformability of the
    uncracked ligament are neglected.
    """

    params: DimensionlessParams
    h1: float
    h2: float
    L1: float
    LT: float
    L2: float
    m: float
    a_max: float = A_MAX

    kind = "tapered-dcb"

    def __post_init__(self):
        if self.m == 0.0:
            raise InvalidParameterError("taper slope m must be non-zero; use StandardDCB instead")
        if abs(self.L1 + self.LT + self.L2 - 1.0) > 1e-12:
            raise InvalidParameterError("L1 + LT + L2 must equal 1")
        if abs(self.h2 - (self.h1 + self.m * self.LT)) > 1e-12:
            raise InvalidParameterError("h2 must equal h1 + m LT")
        if min(self.h1, self.h2, self.L1, self.LT) <= 0.0 or self.L2 < 0.0:
            raise InvalidParameterError("tapered geometry must be positive")

    @property
    def bbar(self) -> float:
        return self.params.bbar

    @property
    def abar0(self) -> float:
        return self.params.abar0

    @property
    def pbar(self) -> float:
        return self.h1 - self.m * self.L1

    @property
    def L12(self) -> float:
        return self.L1 + self.LT

    def height(self, x: ArrayLike) -> ArrayLike:
        xa = np.asarray(x, dtype=float)
        h = np.where(xa <= self.L1, self.h1,
                     np.where(xa <= self.L12, self.pbar + self.m * xa, self.h2))
        return _out(h, x)

    def _taper_bracket(self, x: np.ndarray) -> np.ndarray:
        # Bracketed term of the transition-zone integral, evaluated at x.
        m, p = self.m, self.pbar
        u = m * x + p
        u1 = m * self.L1 + p
        return (2.0 * np.log(u / u1) + (p**2 - 2.0 * m**2 * x**2) / u**2
                - (p**2 - 2.0 * m**2 * self.L1**2) / u1**2
                + 2.0 * m**3 * self.L1**3 / (3.0 * self.h1**3))

    def compliance(self, a: ArrayLike) -> ArrayLike:
        arr = _as_crack(a, hi=self.a_max)
        yb = self.params.Ybar * self.params.bbar
        m = self.m
        c1 = 8.0 * arr**3 / (yb * self.h1**3)
        xt = np.clip(arr, self.L1, self.L12)
        c2 = 12.0 / (yb * m**3) * self._taper_bracket(xt)
        c12 = 12.0 / (yb * m**3) * self._taper_bracket(np.asarray(self.L12))
        c3 = c12 + 8.0 * (arr**3 - self.L12**3) / (yb * self.h2**3)
        c = np.where(arr <= self.L1, c1, np.where(arr <= self.L12, c2, c3))
        return _out(c, a)

    def compliance_derivative(self, a: ArrayLike) -> ArrayLike:
        arr = _as_crack(a, hi=self.a_max)
        h = np.asarray(self.height(arr))
        return _out(24.0 * arr**2 / (self.params.Ybar * self.params.bbar * h**3), a)

    def compliance_second_derivative(self, a: ArrayLike) -> ArrayLike:
        """One-sided (from the left) at the transition-zone ends, where ``h`` has a kink."""
        arr = _as_crack(a, hi=self.a_max)
        h = np.asarray(self.height(arr))
        dh = np.where((arr > self.L1) & (arr <= self.L12), self.m, 0.0)
        yb = self.params.Ybar * self.params.bbar
        return _out((48.0 * arr / h**3 - 72.0 * arr**2 * dh / h**4) / yb, a)


SpecimenModel = Union[StandardDCB, TaperedDCB]

# Tapered geometries (h1, h2, L1, LT, L2, m).
TAPERED_CASES = {
    1: dict(h1=0.10, h2=0.15, L1=0.50, LT=0.10, L2=0.40, m=1.0 / 2.0),
    2: dict(h1=0.10, h2=0.05, L1=0.45, LT=0.30, L2=0.25, m=-1.0 / 6.0),
    3: dict(h1=0.10, h2=0.04, L1=0.45, LT=0.10, L2=0.45, m=-3.0 / 5.0),
}


def tapered_case(params: DimensionlessParams, case: int) -> TaperedDCB:
    return TaperedDCB(params, **TAPERED_CASES[case])


def compliance(s: SpecimenModel, a: ArrayLike) -> ArrayLike:
    return s.compliance(a)


def energy_release_rate(s: SpecimenModel, c: MachineCoupling, DeltaT: float, a: ArrayLike) -> ArrayLike:
    """Energy release rate per unit thickness at fixed machine displacement.

    Computed with the compliance method, ``DeltaT^2 C'/(2 b (C + C_M)^2)``,
    which for the prismatic DCB reduces to the familiar closed form.
    """
    arr = _as_crack(a, strict_lo=True, hi=s.a_max)
    cm = c.CMbar
    g = 0.5 * DeltaT**2 * np.asarray(s.compliance_derivative(arr)) / (
        s.bbar * (np.asarray(s.compliance(arr)) + cm) ** 2)
    return _out(g, a)


def energy_release_rate_slope(s: SpecimenModel, c: MachineCoupling, DeltaT: float, a: ArrayLike) -> ArrayLike:
    """Derivative of ``G~`` with respect to the crack length."""
    arr = _as_crack(a, strict_lo=True, hi=s.a_max)
    cc = np.asarray(s.compliance(arr)) + c.CMbar
    d1 = np.asarray(s.compliance_derivative(arr))
    d2 = np.asarray(s.compliance_second_derivative(arr))
    g = 0.5 * DeltaT**2 / s.bbar * (d2 / cc**2 - 2.0 * d1**2 / cc**3)
    return _out(g, a)


def reduced_energy(s: SpecimenModel, c: MachineCoupling, DeltaT: float, a: ArrayLike) -> ArrayLike:
    arr = np.asarray(s.compliance(a))
    return _out(0.5 * DeltaT**2 / (arr + c.CMbar), a)


def equilibrium_split(s: SpecimenModel, c: MachineCoupling, DeltaT: float, a: float) -> tuple[float, float]:
    """Split the machine displacement into specimen opening and load.

    Returns ``(Delta, P)`` with ``Delta + CMbar P == DeltaT``.
    """
    ca = float(s.compliance(a))
    cm = c.CMbar
    if ca + cm == 0.0:
        if DeltaT != 0.0:
            raise DomainError("rigid specimen in a rigid machine cannot take a displacement")
        return 0.0, 0.0
    P = DeltaT / (ca + cm)
    Delta = ca * P
    return Delta, P
