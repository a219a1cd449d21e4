"""Analytic crack-resistance models and synthetic resistance data sets.

Each model supplies the resistance rate ``G_R(a)`` (per unit thickness) and the
resistance energy ``F_R(a) = b * integral_0^a G_R``.  Data sets are produced by
sampling a model at random abscissae and, optionally, corrupting both columns
with the same multiplicative noise draw per point.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import A_MAX, DomainError, InvalidParameterError
from .specimen import ArrayLike, _as_crack, _out


class GriffithModel:
    """Constant toughness ``G_R = 1``."""

    kind = "griffith"

    def G_R(self, a: ArrayLike) -> ArrayLike:
        arr = _as_crack(a)
        return _out(np.ones_like(arr), a)

    def F_R(self, a: ArrayLike, bbar: float) -> ArrayLike:
        arr = _as_crack(a)
        return _out(bbar * arr, a)

    def to_dict(self) -> dict:
        return {"kind": self.kind}


class RCurveModel:
    """Rising resistance ``G_R = 1 + x^2 / (x^2 + 0.2 x)`` with ``x = a - 0.1``.

    The removable singularity at ``a = 0.1`` is avoided by using the
    equivalent form ``2 - 0.2 / (a + 0.1)``.
    """

    kind = "r-curve"

    def G_R(self, a: ArrayLike) -> ArrayLike:
        arr = _as_crack(a)
        return _out(2.0 - 0.2 / (arr + 0.1), a)

    def F_R(self, a: ArrayLike, bbar: float) -> ArrayLike:
        arr = _as_crack(a)
        return _out(bbar * 0.2 * (10.0 * arr - np.log((arr + 0.1) / 0.1)), a)

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class PiecewiseModel:
    """Piecewise-constant toughness on right-closed intervals.

    ``breaks`` are the interior interval ends and ``levels`` the toughness on
    ``[0, breaks[0]], (breaks[0], breaks[1]], ...``; the last level extends to
    the end of the admissible interval.
    """

    breaks: tuple
    levels: tuple

    kind = "piecewise"

    def __post_init__(self):
        if len(self.levels) != len(self.breaks) + 1:
            raise InvalidParameterError("need exactly one more level than breakpoints")
        if any(v <= 0.0 for v in self.levels):
            raise InvalidParameterError("toughness levels must be positive")
        if list(self.breaks) != sorted(self.breaks) or any(not 0.0 < x < A_MAX for x in self.breaks):
            raise InvalidParameterError("breakpoints must be increasing and inside (0, A_MAX)")

    def _segment(self, arr: np.ndarray) -> np.ndarray:
        # right-closed: a == break belongs to the left interval
        return np.searchsorted(np.asarray(self.breaks, dtype=float), arr, side="left")

    def G_R(self, a: ArrayLike) -> ArrayLike:
        arr = _as_crack(a)
        return _out(np.asarray(self.levels, dtype=float)[self._segment(arr)], a)

    def F_R(self, a: ArrayLike, bbar: float) -> ArrayLike:
        arr = _as_crack(a)
        lv = np.asarray(self.levels, dtype=float)
        starts = np.concatenate([[0.0], np.asarray(self.breaks, dtype=float)])
        # energy accumulated up to the start of each segment
        base = np.concatenate([[0.0], np.cumsum(lv[:-1] * np.diff(starts))])
        j = self._segment(arr)
        return _out(bbar * (base[j] + lv[j] * (arr - starts[j])), a)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "breaks": list(self.breaks), "levels": list(self.levels)}


STABLE_BIMATERIAL = PiecewiseModel(breaks=(0.5,), levels=(1.0, 5.0))
UNSTABLE_BIMATERIAL = PiecewiseModel(breaks=(0.5,), levels=(5.0, 1.0))

ResistanceModel = Union[GriffithModel, RCurveModel, PiecewiseModel]


def model_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "griffith":
        return GriffithModel()
    if kind == "r-curve":
        return RCurveModel()
    if kind == "piecewise":
        return PiecewiseModel(tuple(float(x) for x in d["breaks"]), tuple(float(x) for x in d["levels"]))
    if kind == "bimaterial-stable":
        return STABLE_BIMATERIAL
    if kind == "bimaterial-unstable":
        return UNSTABLE_BIMATERIAL
    raise InvalidParameterError(f"unknown resistance model {kind!r}")


def G_R(model, a: ArrayLike) -> ArrayLike:
    return model.G_R(a)


def F_R(model, a: ArrayLike, bbar: float) -> ArrayLike:
    return model.F_R(a, bbar)


@dataclass(frozen=True)
class SortedView:
    a: np.ndarray
    F_R: np.ndarray
    G_R: np.ndarray
    order: np.ndarray


@dataclass(frozen=True, eq=False)
class ResistanceDataSet:
    """Discrete resistance data: abscissae with energy and rate columns.

    Rows are kept in the order they were generated or read; solvers never
    reorder the stored data.
    """

    a: np.ndarray
    F_R: np.ndarray
    G_R: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("a", "F_R", "G_R"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.a.shape == self.F_R.shape == self.G_R.shape) or self.a.ndim != 1:
            raise InvalidParameterError("data set columns must be 1-D and of equal length")
        if np.any(self.a < 0.0) or np.any(self.a > A_MAX):
            raise DomainError("data set abscissae must lie in [0, A_MAX]")
        if np.any(self.F_R < 0.0):
            raise InvalidParameterError("resistance energies must be non-negative")
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self) -> int:
        return int(self.a.size)

    @cached_property
    def sorted_view(self) -> "SortedView":
        """Abscissa-sorted copy used by the solvers as a search index."""
        order = np.argsort(self.a, kind="stable")
        return SortedView(self.a[order], self.F_R[order], self.G_R[order], order)

    @cached_property
    def mean_spacing(self) -> float:
        """Average gap between consecutive sorted abscissae."""
        a = self.sorted_view.a
        if a.size < 2:
            return 0.0
        return float(np.mean(np.diff(a)))

    @property
    def name(self) -> str:
        m = self.meta
        if not m:
            return "dataset"
        return f"{m.get('model', '?')}-N{m.get('N', len(self))}-noise{m.get('amplitude', 0)}-seed{m.get('seed')}"


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_dataset(model, N: int, interval: Sequence[float] = (0.0, A_MAX), seed=None,
                   bbar: float = 1.0 / 30.0, stratified: bool = False) -> ResistanceDataSet:
    """Evaluate ``model`` at ``N`` random abscissae drawn on ``interval``.

    Abscissae are independent uniform draws unless ``stratified`` is set, in
    which case one draw falls in each of ``N`` equal sub-intervals.
    """
    if N < 2:
        raise InvalidParameterError("need at least two points")
    lo, hi = float(interval[0]), float(interval[1])
    if hi < lo:
        raise InvalidParameterError(f"empty interval [{lo}, {hi}]")
    rng = _rng(seed)
    if stratified:
        edges = np.linspace(lo, hi, N + 1)
        a = edges[:-1] + (edges[1:] - edges[:-1]) * rng.random(N)
    else:
        a = lo + (hi - lo) * rng.random(N)
    a = np.clip(a, lo, hi)
    meta = {"model": model.to_dict(), "N": int(N), "interval": [lo, hi], "amplitude": 0.0,
            "seed": seed if isinstance(seed, int) else None}
    return ResistanceDataSet(a, model.F_R(a, bbar), model.G_R(a), meta)


def uniform_noise(rng: np.random.Generator, amplitude: float, n: int) -> np.ndarray:
    return rng.uniform(-amplitude, amplitude, n)


def apply_noise(d: ResistanceDataSet, amplitude: float, seed=None,
                distribution: Callable[[np.random.Generator, float, int], np.ndarray] = uniform_noise
                ) -> ResistanceDataSet:
    """Perturb both columns by the same relative deviation per point.

    ``amplitude`` is the half-range of the relative deviation: ``0.025``
    means observed values within +-2.5% of the expected ones.
    """
    if amplitude < 0.0:
        raise InvalidParameterError("noise amplitude must be non-negative")
    meta = dict(d.meta, amplitude=float(amplitude))
    if amplitude == 0.0:
        return ResistanceDataSet(d.a, d.F_R, d.G_R, meta)
    u = distribution(_rng(seed), amplitude, len(d))
    return ResistanceDataSet(d.a, d.F_R * (1.0 + u), d.G_R * (1.0 + u), meta)


def grid_dataset(model, a: Sequence[float], bbar: float = 1.0 / 30.0) -> ResistanceDataSet:
    """Noiseless data set at the given abscissae (no randomness)."""
    arr = np.asarray(a, dtype=float)
    return ResistanceDataSet(arr, model.F_R(arr, bbar), model.G_R(arr),
                             {"model": model.to_dict(), "N": int(arr.size), "amplitude": 0.0, "seed": None})


# -- CSV / JSON --------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dataset_to_csv_text(d: ResistanceDataSet) -> str:
    lines = ["a,F_R,G_R"]
    lines += [f"{_fmt(a)},{_fmt(f)},{_fmt(g)}" for a, f, g in zip(d.a, d.F_R, d.G_R)]
    return "\n".join(lines) + "\n"


def write_dataset(d: ResistanceDataSet, csv_path: str, meta_path: Optional[str] = None) -> None:
    """Write the CSV and its JSON sidecar (``<csv>.json`` by default)."""
    _atomic_write(csv_path, dataset_to_csv_text(d))
    meta_path = meta_path or csv_path + ".json"
    _atomic_write(meta_path, json.dumps(d.meta, indent=2, sort_keys=True) + "\n")


def read_dataset(csv_path: str, meta_path: Optional[str] = None) -> ResistanceDataSet:
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["a", "F_R", "G_R"]:
            raise InvalidParameterError(f"unexpected dataset header {header!r}")
        rows = [[float(x) for x in r] for r in reader if r]
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    meta_path = meta_path or csv_path + ".json"
    meta = {}
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            meta = json.load(fh)
    return ResistanceDataSet(arr[:, 0], arr[:, 1], arr[:, 2], meta)
