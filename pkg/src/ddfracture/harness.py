"""Incremental quasi-static driver, error metric and convergence studies."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .core import (SPECIMEN_LENGTH, BracketingError, FractureError, InvalidParameterError, ScheduleMismatchError,
                   SolutionTrace, TraceStep)
from .reference import ReferenceConfig, reference_global_step, reference_local_step
from .resistance import ResistanceDataSet, apply_noise, sample_dataset
from .solvers import CppConfig, SolverState, StepResult, consistency_step, cpp_step, global_step, init_G_R0
from .specimen import MachineCoupling, SpecimenModel, equilibrium_split

ALL_SOLVERS = ("global", "cpp", "consistency", "ref-global", "ref-local")

# Reference each data-driven solver is measured against.
MATCHING_REFERENCE = {"global": "ref-global", "cpp": "ref-local", "consistency": "ref-local"}


@dataclass(frozen=True)
class LoadProgram:
    """Piecewise-linear machine displacement history.

    The displacement starts at ``waypoints[0]`` and moves towards each
    following waypoint in steps of ``increment``; every step lands on a
    multiple of the increment away from the segment start.
    """

    waypoints: tuple
    increment: float

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(float(w) for w in self.waypoints))
        if not self.increment > 0.0:
            raise InvalidParameterError("increment must be positive")
        if len(self.waypoints) < 1 or any(w < 0.0 for w in self.waypoints):
            raise InvalidParameterError("waypoints must be non-negative")
        for w0, w1 in zip(self.waypoints[:-1], self.waypoints[1:]):
            n = abs(w1 - w0) / self.increment
            if abs(n - round(n)) > 1e-6:
                raise InvalidParameterError(f"segment {w0} -> {w1} is not a multiple of the increment")

    @classmethod
    def ramp(cls, n_steps: int = 400, increment: float = 5e-5) -> "LoadProgram":
        return cls((0.0, n_steps * increment), increment)

    def values(self) -> np.ndarray:
        out = []
        for w0, w1 in zip(self.waypoints[:-1], self.waypoints[1:]):
            n = int(round(abs(w1 - w0) / self.increment))
            sign = 1.0 if w1 >= w0 else -1.0
            j = np.arange(1, n + 1)
            seg = w0 + sign * self.increment * j
            if n:
                seg[-1] = w1
            out.append(seg)
        return np.concatenate(out) if out else np.empty(0)

    def __len__(self) -> int:
        return int(self.values().size)

    def to_dict(self) -> dict:
        return {"waypoints": list(self.waypoints), "increment": self.increment}


DEFAULT_PROGRAM = LoadProgram.ramp(400, 5e-5)
# Ramp with a full unload/reload excursion starting at 5e-3.
UNLOAD_RELOAD_PROGRAM = LoadProgram((0.0, 5e-3, 0.0, 40e-3), 5e-5)


def _initial_state(solver, source, specimen, a0, G_R0_rule) -> SolverState:
    """Initial crack and, for the closest-point solver, its toughness threshold.

    ``G_R0_rule`` is ``"average"``, ``"zero"`` or ``"auto"`` (average when the
    data bracket ``a0``, zero otherwise).
    """
    if solver != "cpp":
        return SolverState(a0)
    if G_R0_rule == "auto":
        try:
            return SolverState(a0, init_G_R0(source, a0, "average"))
        except BracketingError:
            return SolverState(a0, init_G_R0(source, a0, "zero"))
    return SolverState(a0, init_G_R0(source, a0, G_R0_rule))


def solve_step(solver: str, state: SolverState, DeltaT: float, source, specimen: SpecimenModel,
               coupling: MachineCoupling, cpp_cfg: CppConfig = CppConfig(),
               ref_cfg: ReferenceConfig = ReferenceConfig()) -> StepResult:
    """Dispatch one load step to the named solver."""
    if solver == "global":
        return global_step(state, DeltaT, source, specimen, coupling)
    if solver == "cpp":
        return cpp_step(state, DeltaT, source, specimen, coupling, cpp_cfg)
    if solver == "consistency":
        return consistency_step(state, DeltaT, source, specimen, coupling)
    if solver in ("ref-global", "ref-local"):
        fn = reference_global_step if solver == "ref-global" else reference_local_step
        a_next = fn(state.a_k, DeltaT, source, specimen, coupling, ref_cfg)
        Delta, P = equilibrium_split(specimen, coupling, DeltaT, a_next)
        return StepResult(a_next, Delta, P, dissipative=a_next > state.a_k)
    raise InvalidParameterError(f"unknown solver {solver!r}")


def run_trace(solver: str, program: LoadProgram, source, specimen: SpecimenModel,
              coupling: MachineCoupling, initial: Optional[SolverState] = None, *,
              cpp_cfg: CppConfig = CppConfig(), ref_cfg: ReferenceConfig = ReferenceConfig(),
              G_R0_rule: str = "average", seed: Optional[int] = None) -> SolutionTrace:
    """Run ``solver`` over every step of ``program``.

    ``source`` is a :class:`ResistanceDataSet` for the data-driven solvers and
    an analytic resistance model for the reference ones.  The trace stops at
    the first failed step: unstable propagation reported by a solver, or the
    crack reaching the end of the specimen.
    """
    if solver in ("global", "cpp", "consistency") and not isinstance(source, ResistanceDataSet):
        raise InvalidParameterError(f"solver {solver!r} needs a resistance data set")
    state = initial or _initial_state(solver, source, specimen, specimen.abar0, G_R0_rule)
    name = source.name if isinstance(source, ResistanceDataSet) else source.kind
    trace = SolutionTrace(solver=solver, dataset=name, seed=seed)
    for k, D in enumerate(program.values(), start=1):
        D = float(D)
        try:
            r = solve_step(solver, state, D, source, specimen, coupling, cpp_cfg, ref_cfg)
        except FractureError as exc:
            raise type(exc)(f"step {k} (DeltaT={D!r}): {exc}") from exc
        failed = r.failed or r.a_next >= SPECIMEN_LENGTH
        trace.append(TraceStep(k, D, r.a_next, r.Delta, r.P, r.G_DD, r.dissipative, failed))
        if failed:
            break
        state = r.next_state()
    return trace


def error_metric(trace: SolutionTrace, reference: SolutionTrace) -> float:
    """Root of the summed squared crack-length differences over the common prefix."""
    n = min(len(trace), len(reference))
    d1 = np.asarray(trace.DeltaT[:n], dtype=float)
    d2 = np.asarray(reference.DeltaT[:n], dtype=float)
    if not np.allclose(d1, d2, rtol=1e-12, atol=1e-15):
        raise ScheduleMismatchError("traces were computed on different load schedules")
    diff = np.asarray(trace.a[:n], dtype=float) - np.asarray(reference.a[:n], dtype=float)
    return math.sqrt(math.fsum(diff * diff))


# -- convergence studies ------------------------------------------------------

@dataclass
class ConfigResult:
    label: str
    N: int
    amplitude: float
    errors: List[float]
    failure_steps: List[Optional[int]]
    mu: float
    sigma: float
    hist_edges: List[float]
    hist_counts: List[int]
    overflow: int
    envelope_DeltaT: List[float]
    envelope_min: List[Optional[float]]
    envelope_max: List[Optional[float]]


@dataclass
class ConvergenceReport:
    solver: str
    seed: int
    program: dict
    reference: List[float] = field(default_factory=list)
    configs: List[ConfigResult] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceReport":
        return cls(d["solver"], d["seed"], d["program"], list(d["reference"]),
                   [ConfigResult(**c) for c in d["configs"]])

    def mu(self) -> List[float]:
        return [c.mu for c in self.configs]


def histogram(errors: Sequence[float], mu: float, nbins: int = 20):
    """Counts in bins of width ``0.1 mu`` on ``[0, 2 mu)`` plus an overflow count."""
    e = np.asarray(errors, dtype=float)
    counts = np.zeros(nbins, dtype=int)
    if mu <= 0.0:
        counts[0] = e.size
        return [0.0] * (nbins + 1), counts.tolist(), 0
    width = 2.0 * mu / nbins
    idx = np.floor(e / width).astype(int)
    over = int(np.sum(idx >= nbins))
    np.add.at(counts, idx[idx < nbins], 1)
    return (width * np.arange(nbins + 1)).tolist(), counts.tolist(), over


def envelope(traces: Sequence[SolutionTrace], n_steps: int):
    lo: List[Optional[float]] = [None] * n_steps
    hi: List[Optional[float]] = [None] * n_steps
    for t in traces:
        for i, s in enumerate(t.steps[:n_steps]):
            lo[i] = s.a if lo[i] is None else min(lo[i], s.a)
            hi[i] = s.a if hi[i] is None else max(hi[i], s.a)
    return lo, hi


def replication_rngs(seed: int, N: int, r: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent streams for abscissae and noise of replication ``r``.

    Keyed on ``(N, r)`` only, so configurations that share ``N`` reuse the
    same abscissae and noise pattern.
    """
    ss_a = np.random.SeedSequence(seed, spawn_key=(N, r, 0))
    ss_u = np.random.SeedSequence(seed, spawn_key=(N, r, 1))
    return np.random.default_rng(ss_a), np.random.default_rng(ss_u)


@dataclass(frozen=True)
class _Job:
    solver: str
    model: object
    N: int
    amplitude: float
    r: int
    seed: int
    program: LoadProgram
    specimen: object
    coupling: MachineCoupling
    interval: tuple
    cpp_cfg: CppConfig


def make_dataset(model, N: int, amplitude: float, seed: int, r: int, bbar: float,
                 interval=(0.0, 1.1)) -> ResistanceDataSet:
    rng_a, rng_u = replication_rngs(seed, N, r)
    d = sample_dataset(model, N, interval, rng_a, bbar)
    d = apply_noise(d, amplitude, rng_u)
    d.meta.update(seed=seed, replication=r)
    return d


def _run_job(job: _Job) -> SolutionTrace:
    d = make_dataset(job.model, job.N, job.amplitude, job.seed, job.r, job.specimen.bbar, job.interval)
    # small random data sets need not bracket a0
    return run_trace(job.solver, job.program, d, job.specimen, job.coupling, cpp_cfg=job.cpp_cfg,
                     G_R0_rule="auto", seed=job.seed)


def _map(fn, jobs, workers: Optional[int]):
    if workers is None:
        workers = int(os.environ.get("DDFRACTURE_WORKERS", "1"))
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        # map preserves job order, so the merge is independent of scheduling
        return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _study(solver, configs, replications, program, model, specimen, coupling, seed,
           interval, cpp_cfg, workers) -> ConvergenceReport:
    if solver not in MATCHING_REFERENCE:
        raise InvalidParameterError(f"convergence studies need a data-driven solver, got {solver!r}")
    if replications < 1:
        raise InvalidParameterError("replications must be >= 1")
    ref = run_trace(MATCHING_REFERENCE[solver], program, model, specimen, coupling)
    report = ConvergenceReport(solver, int(seed), program.to_dict(), ref.a)
    n_steps = len(program)
    schedule = program.values().tolist()
    for N, amp in configs:
        jobs = [_Job(solver, model, N, amp, r, seed, program, specimen, coupling, tuple(interval), cpp_cfg)
                for r in range(replications)]
        traces = _map(_run_job, jobs, workers)
        errors = [error_metric(t, ref) for t in traces]
        mu = math.fsum(errors) / len(errors)
        sigma = math.sqrt(math.fsum((e - mu) ** 2 for e in errors) / len(errors))
        edges, counts, over = histogram(errors, mu)
        lo, hi = envelope(traces, n_steps)
        label = f"N={N},noise={amp:g}"
        report.configs.append(ConfigResult(label, int(N), float(amp), errors,
                                           [t.failure_step for t in traces], mu, sigma,
                                           edges, counts, over, schedule, lo, hi))
    return report


def convergence_vs_points(solver: str, counts: Sequence[int], replications: int, program: LoadProgram,
                          model, specimen: SpecimenModel, coupling: MachineCoupling, seed: int = 0,
                          *, amplitude: float = 0.0, interval=(0.0, 1.1), cpp_cfg: CppConfig = CppConfig(),
                          workers: Optional[int] = None) -> ConvergenceReport:
    """Error statistics versus data set size (noiseless by default)."""
    if not counts:
        raise InvalidParameterError("counts must not be empty")
    return _study(solver, [(int(N), amplitude) for N in counts], replications, program, model,
                  specimen, coupling, seed, interval, cpp_cfg, workers)


def convergence_vs_noise(solver: str, amplitudes: Sequence[float], N: int, replications: int,
                         program: LoadProgram, model, specimen: SpecimenModel, coupling: MachineCoupling,
                         seed: int = 0, *, interval=(0.0, 1.1), cpp_cfg: CppConfig = CppConfig(),
                         workers: Optional[int] = None) -> ConvergenceReport:
    """Error statistics versus noise amplitude at a fixed data set size.

    ``amplitudes`` are half-ranges: a 5% noise range is ``0.025``.
    """
    if not amplitudes:
        raise InvalidParameterError("amplitudes must not be empty")
    return _study(solver, [(int(N), float(a)) for a in amplitudes], replications, program, model,
                  specimen, coupling, seed, interval, cpp_cfg, workers)


# -- trace I/O ----------------------------------------------------------------

TRACE_HEADER = "k,DeltaT,a,Delta,P,G_DD,dissipative,failed"


def trace_to_csv_text(trace: SolutionTrace) -> str:
    lines = [TRACE_HEADER]
    for s in trace:
        gdd = "" if s.G_DD is None else repr(float(s.G_DD))
        lines.append(",".join([str(s.k), repr(float(s.DeltaT)), repr(float(s.a)), repr(float(s.Delta)),
                               repr(float(s.P)), gdd, str(s.dissipative).lower(), str(s.failed).lower()]))
    return "\n".join(lines) + "\n"


def trace_from_csv_text(text: str) -> SolutionTrace:
    rows = [ln for ln in text.splitlines() if ln.strip()]
    if not rows or rows[0].strip() != TRACE_HEADER:
        raise InvalidParameterError("not a trace CSV")
    trace = SolutionTrace()
    for ln in rows[1:]:
        k, D, a, Delta, P, gdd, dis, fail = ln.split(",")
        trace.append(TraceStep(int(k), float(D), float(a), float(Delta), float(P),
                               None if gdd == "" else float(gdd), dis == "true", fail == "true"))
    return trace
