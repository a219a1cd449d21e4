"""Command-line front end.

Every command reads one JSON experiment configuration::

    {
      "schema": "ddfracture/1",
      "specimen": {"kind": "standard-dcb", "Y": 70000, "L": 30, "h": 3, "b": 1, "a0": 3, "gamma": 0.06},
      "machine": {"C_M": 2e-3},
      "resistance": {"kind": "griffith"},
      "dataset": {"N": 1000, "interval": [0, 1.1], "amplitude": 0.0, "seed": 0},
      "solver": {"kind": "cpp", "tol": null, "G_R0_rule": "average"},
      "program": {"waypoints": [0, 0.02], "deltaT": 1.5e-3},
      "study": {"counts": [50, 100], "replications": 20},
      "output": {"dir": "out"}
    }

The specimen and machine blocks take either physical inputs (``Y, L, h, b,
a0, gamma`` and ``C_M``) or dimensionless ones (``hbar, bbar, abar0, Ybar``
and ``CMbar``), never a mix.  Program waypoints are dimensionless; the step
is either ``increment`` (dimensionless) or ``deltaT`` (physical).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import (A_MAX, BracketingError, DatasetExhaustedError, DimensionlessParams, DomainError,
                   FractureError, InvalidParameterError, PhysicalParams, ScheduleMismatchError, nondimensionalize)
from .harness import (ALL_SOLVERS, LoadProgram, convergence_vs_noise, convergence_vs_points, error_metric,
                      make_dataset, run_trace, trace_from_csv_text, trace_to_csv_text)
from .resistance import _atomic_write, model_from_dict, read_dataset, write_dataset
from .solvers import CppConfig
from .specimen import TAPERED_CASES, MachineCoupling, StandardDCB, TaperedDCB

SCHEMA = "ddfracture/1"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUN_FAILED = 3
EXIT_EXHAUSTED = 4
EXIT_SCHEDULE = 5
EXIT_IO = 6

_PHYS_SPECIMEN = ("Y", "L", "h", "b", "a0", "gamma")
_DIM_SPECIMEN = ("hbar", "bbar", "abar0", "Ybar")
_TAPER = ("h1", "h2", "L1", "LT", "L2", "m")


class ConfigError(InvalidParameterError):
    """The experiment configuration is malformed."""


def _pick(block: dict, keys: Sequence[str], name: str) -> dict:
    missing = [k for k in keys if k not in block]
    if missing:
        raise ConfigError(f"{name}: missing {', '.join(missing)}")
    return {k: float(block[k]) for k in keys}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration, held in dimensionless form."""

    params: DimensionlessParams
    specimen_kind: str = "standard-dcb"
    taper: Optional[dict] = None
    resistance: dict = field(default_factory=lambda: {"kind": "griffith"})
    dataset: dict = field(default_factory=dict)
    solver: dict = field(default_factory=lambda: {"kind": "cpp", "tol": None, "G_R0_rule": "average"})
    program: LoadProgram = LoadProgram.ramp()
    study: dict = field(default_factory=dict)
    output: dict = field(default_factory=lambda: {"dir": "out"})

    def specimen(self):
        if self.specimen_kind == "standard-dcb":
            return StandardDCB(self.params)
        return TaperedDCB(self.params, **self.taper)

    def coupling(self) -> MachineCoupling:
        return MachineCoupling(self.params.CMbar)

    def model(self):
        return model_from_dict(self.resistance)

    def cpp_config(self) -> CppConfig:
        return CppConfig(tol=self.solver.get("tol"))

    def to_dict(self) -> dict:
        p = self.params
        spec = {"kind": self.specimen_kind, "hbar": p.hbar, "bbar": p.bbar, "abar0": p.abar0, "Ybar": p.Ybar}
        if self.taper is not None:
            spec.update(self.taper)
        return {
            "schema": SCHEMA,
            "specimen": spec,
            "machine": {"CMbar": p.CMbar},
            "resistance": dict(self.resistance),
            "dataset": dict(self.dataset),
            "solver": dict(self.solver),
            "program": {"waypoints": list(self.program.waypoints), "increment": self.program.increment},
            "study": dict(self.study),
            "output": dict(self.output),
        }


def _parse_specimen(spec: dict, machine: dict):
    phys = [k for k in _PHYS_SPECIMEN if k in spec]
    dim = [k for k in _DIM_SPECIMEN if k in spec]
    if phys and dim:
        raise ConfigError("specimen: physical and dimensionless inputs mixed")
    mphys, mdim = "C_M" in machine, "CMbar" in machine
    if mphys and mdim:
        raise ConfigError("machine: physical and dimensionless inputs mixed")
    if not (mphys or mdim):
        raise ConfigError("machine: give C_M or CMbar")
    if phys:
        s = _pick(spec, _PHYS_SPECIMEN, "specimen")
        C_M = float(machine["C_M"]) if mphys else float(machine["CMbar"]) / s["gamma"]
        # deltaT is irrelevant here; the program block owns the step size
        params, _ = nondimensionalize(PhysicalParams(C_M=C_M, deltaT=1.0, **s))
        return params, s["L"]
    if mphys:
        raise ConfigError("machine: physical C_M needs a physical specimen block")
    s = _pick(spec, _DIM_SPECIMEN, "specimen")
    return DimensionlessParams(CMbar=float(machine["CMbar"]), **s), None


def _parse_program(block: dict, L: Optional[float]) -> LoadProgram:
    if "waypoints" not in block:
        raise ConfigError("program: missing waypoints")
    if ("increment" in block) == ("deltaT" in block):
        raise ConfigError("program: give exactly one of increment or deltaT")
    if "deltaT" in block:
        if L is None:
            raise ConfigError("program: physical deltaT needs a physical specimen block")
        inc = float(block["deltaT"]) / L
    else:
        inc = float(block["increment"])
    return LoadProgram(tuple(block["waypoints"]), inc)


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a configuration document and normalize it to dimensionless form."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported schema {doc.get('schema')!r}, expected {SCHEMA!r}")
    spec = dict(doc.get("specimen") or {})
    kind = spec.pop("kind", "standard-dcb")
    params, L = _parse_specimen(spec, dict(doc.get("machine") or {}))
    taper = None
    if kind == "tapered-dcb":
        if "case" in spec:
            if any(k in spec for k in _TAPER):
                raise ConfigError("specimen: give a taper case or its geometry, not both")
            taper = dict(TAPERED_CASES[int(spec["case"])])
        else:
            taper = _pick(spec, _TAPER, "specimen")
    elif kind != "standard-dcb":
        raise ConfigError(f"specimen: unknown kind {kind!r}")
    resistance = dict(doc.get("resistance") or {"kind": "griffith"})
    model_from_dict(resistance)

    ds = dict(doc.get("dataset") or {})
    ds.setdefault("interval", [0.0, A_MAX])
    ds.setdefault("amplitude", 0.0)
    ds.setdefault("seed", 0)
    ds["interval"] = [float(x) for x in ds["interval"]]
    ds["amplitude"] = float(ds["amplitude"])
    ds["seed"] = int(ds["seed"])
    if "N" in ds:
        ds["N"] = int(ds["N"])

    solver = dict(doc.get("solver") or {})
    solver.setdefault("kind", "cpp")
    solver.setdefault("tol", None)
    solver.setdefault("G_R0_rule", "average")
    if solver["kind"] not in ALL_SOLVERS:
        raise ConfigError(f"solver: unknown kind {solver['kind']!r}")
    if solver["G_R0_rule"] not in ("average", "zero", "auto"):
        raise ConfigError(f"solver: unknown G_R0 rule {solver['G_R0_rule']!r}")
    if solver["tol"] is not None:
        solver["tol"] = float(solver["tol"])

    program = _parse_program(dict(doc.get("program") or {"waypoints": [0.0, 0.02], "increment": 5e-5}), L)
    study = dict(doc.get("study") or {})
    output = dict(doc.get("output") or {"dir": "out"})
    cfg = ExperimentConfig(params, kind, taper, resistance, ds, solver, program, study, output)
    cfg.specimen()
    cfg.cpp_config()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(doc)


# -- commands ------------------------------------------------------------------

def _out_dir(cfg: ExperimentConfig, args) -> str:
    d = args.out or cfg.output.get("dir", "out")
    os.makedirs(d, exist_ok=True)
    return d


def _dataset(cfg: ExperimentConfig):
    ds = cfg.dataset
    if ds.get("path"):
        return read_dataset(ds["path"])
    if "N" not in ds:
        raise ConfigError("dataset: give N or path")
    return make_dataset(cfg.model(), ds["N"], ds["amplitude"], ds["seed"], 0, cfg.params.bbar, tuple(ds["interval"]))


def cmd_generate(cfg: ExperimentConfig, args) -> int:
    d = _dataset(cfg)
    path = os.path.join(_out_dir(cfg, args), "dataset.csv")
    write_dataset(d, path)
    print(path)
    return EXIT_OK


def _solve(cfg: ExperimentConfig, args, solver: str) -> int:
    if solver.startswith("ref-"):
        source = cfg.model()
    else:
        source = _dataset(cfg)
    trace = run_trace(solver, cfg.program, source, cfg.specimen(), cfg.coupling(), cpp_cfg=cfg.cpp_config(),
                      G_R0_rule=cfg.solver["G_R0_rule"], seed=cfg.dataset.get("seed"))
    path = os.path.join(_out_dir(cfg, args), f"trace-{solver}.csv")
    _atomic_write(path, trace_to_csv_text(trace))
    print(path)
    if trace.failed:
        print(f"run stopped at step {trace.failure_step} (a = {trace[-1].a!r})", file=sys.stderr)
        return EXIT_RUN_FAILED
    return EXIT_OK


def cmd_solve(cfg: ExperimentConfig, args) -> int:
    return _solve(cfg, args, cfg.solver["kind"])


def cmd_reference(cfg: ExperimentConfig, args) -> int:
    kind = cfg.solver["kind"]
    return _solve(cfg, args, kind if kind.startswith("ref-") else "ref-local")


def cmd_converge(cfg: ExperimentConfig, args) -> int:
    st = cfg.study
    solver = cfg.solver["kind"]
    reps = int(st.get("replications", 20))
    seed = cfg.dataset["seed"]
    common = dict(interval=tuple(cfg.dataset["interval"]), cpp_cfg=cfg.cpp_config(), workers=st.get("workers"))
    if "amplitudes" in st and "counts" in st:
        raise ConfigError("study: give counts or amplitudes, not both")
    if "amplitudes" in st:
        rep = convergence_vs_noise(solver, [float(a) for a in st["amplitudes"]], int(st.get("N", 5000)), reps,
                                   cfg.program, cfg.model(), cfg.specimen(), cfg.coupling(), seed, **common)
    elif "counts" in st:
        rep = convergence_vs_points(solver, [int(n) for n in st["counts"]], reps, cfg.program, cfg.model(),
                                    cfg.specimen(), cfg.coupling(), seed,
                                    amplitude=cfg.dataset["amplitude"], **common)
    else:
        raise ConfigError("study: give counts or amplitudes")
    out = _out_dir(cfg, args)
    _atomic_write(os.path.join(out, "report.json"), rep.to_json() + "\n")
    for i, c in enumerate(rep.configs):
        lines = ["bin_lo,bin_hi,count"]
        lines += [f"{lo!r},{hi!r},{n}" for lo, hi, n in zip(c.hist_edges[:-1], c.hist_edges[1:], c.hist_counts)]
        lines.append(f"{c.hist_edges[-1]!r},inf,{c.overflow}")
        _atomic_write(os.path.join(out, f"histogram-{i}.csv"), "\n".join(lines) + "\n")
        env = ["DeltaT,a_ref,a_min,a_max"]
        for k, D in enumerate(c.envelope_DeltaT):
            ref = rep.reference[k] if k < len(rep.reference) else None
            env.append(",".join("" if v is None else repr(float(v))
                                for v in (D, ref, c.envelope_min[k], c.envelope_max[k])))
        _atomic_write(os.path.join(out, f"envelope-{i}.csv"), "\n".join(env) + "\n")
    for c in rep.configs:
        print(f"{c.label}: mu={c.mu!r} sigma={c.sigma!r}")
    return EXIT_OK


def cmd_compare(args) -> int:
    with open(args.trace_a) as fh:
        ta = trace_from_csv_text(fh.read())
    with open(args.trace_b) as fh:
        tb = trace_from_csv_text(fh.read())
    eps = error_metric(ta, tb)
    n = min(len(ta), len(tb))
    lines = ["k,DeltaT,a,a_other,residual"]
    for sa, sb in zip(ta.steps[:n], tb.steps[:n]):
        lines.append(f"{sa.k},{sa.DeltaT!r},{sa.a!r},{sb.a!r},{sa.a - sb.a!r}")
    out = args.out or "."
    _atomic_write(os.path.join(out, "residuals.csv"), "\n".join(lines) + "\n")
    print(repr(eps))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ddfracture", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, hlp in (("generate", "sample a resistance data set"),
                      ("solve", "run the configured solver over the load program"),
                      ("reference", "run a reference solver with the analytic model"),
                      ("converge", "run a convergence study")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--config", required=True, help="JSON experiment configuration")
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--solver", choices=ALL_SOLVERS, default=None, help="override the configured solver")
    p = sub.add_parser("compare", help="error between two traces")
    p.add_argument("trace_a")
    p.add_argument("trace_b")
    p.add_argument("--out", default=None, help="directory for residuals.csv")
    return ap


_COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "reference": cmd_reference, "converge": cmd_converge}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            return cmd_compare(args)
        cfg = load_config(args.config)
        doc = cfg.to_dict()
        if args.seed is not None:
            doc["dataset"]["seed"] = args.seed
        if args.solver is not None:
            doc["solver"]["kind"] = args.solver
        cfg = parse_config(doc)
        return _COMMANDS[args.command](cfg, args)
    except ScheduleMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEDULE
    except DatasetExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (InvalidParameterError, DomainError, BracketingError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FractureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED


if __name__ == "__main__":
    sys.exit(main())
