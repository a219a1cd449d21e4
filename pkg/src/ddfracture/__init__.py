"""Data-driven quasi-static crack propagation in DCB specimens."""

from .core import (A_MAX, TABLE1, BracketingError, DatasetExhaustedError, DimensionlessParams, DomainError,
                   FractureError, InvalidParameterError, PhysicalParams, ScheduleMismatchError, SolutionTrace,
                   TraceStep, nondimensionalize)
from .harness import (DEFAULT_PROGRAM, UNLOAD_RELOAD_PROGRAM, ConvergenceReport, LoadProgram,
                      convergence_vs_noise, convergence_vs_points, error_metric, run_trace)
from .reference import ReferenceConfig, reference_global_step, reference_local_step
from .resistance import (STABLE_BIMATERIAL, UNSTABLE_BIMATERIAL, GriffithModel, PiecewiseModel, RCurveModel,
                         ResistanceDataSet, apply_noise, read_dataset, sample_dataset, write_dataset)
from .solvers import CppConfig, SolverState, consistency_step, cpp_step, global_step, init_G_R0, project_distance
from .specimen import (MachineCoupling, StandardDCB, TaperedDCB, energy_release_rate, equilibrium_split,
                       reduced_energy, tapered_case)

__version__ = "0.1.0"
