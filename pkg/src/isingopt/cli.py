"""Batch command-line front end.

``isingopt solve`` runs parse/generate -> reduce (BILP inputs) -> engine ->
decode and writes a JSON or CSV report. ``isingopt generate`` writes a
generated instance to a file.

Exit codes: 0 ok, 1 other failure, 2 parse/config error, 3 reduction error,
4 engine divergence, 5 I/O error. Failures are also written to stderr as
one JSON record.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, _backend
from .annealer import AnnealParams, AnnealSchedule, NoiseConfig, anneal, chain_rng, greedy_descent
from .cim import CimParams, cim_solve
from .errors import EngineDivergence, IsingOptError, ModelError, OracleCapError, ParseError, ReductionError
from .formats import FORMAT_VERSION, FORMATS, detect_format, dumps_instance, parse_instance
from .generators import generate, parse_generator_spec
from .ising import IsingModel, energy
from .oracle import enumerate_ising
from .reduction import BilpInstance, PenaltyWeights, decode, reduce
from .report import SolveReport

__all__ = ["RunConfig", "run", "solve", "main"]

EXIT_OK, EXIT_OTHER, EXIT_PARSE, EXIT_REDUCTION, EXIT_DIVERGENCE, EXIT_IO = 0, 1, 2, 3, 4, 5
ENGINES = ("anneal", "cim", "greedy", "oracle")

_ANNEAL_KEYS = {"t_start", "t_end", "sweeps", "schedule", "restarts", "update_rule", "sweep_order",
                "p_input_invert", "p_output_invert"}
_CIM_KEYS = {f.name for f in dataclasses.fields(CimParams)} - {"seed"}


@dataclass
class RunConfig:
    engine: str = "anneal"
    input: str | None = None
    generate: str | None = None
    format: str | None = None
    seed: int = 0
    out: str | None = None
    report: str = "json"
    trace: str | None = None
    anneal: dict = field(default_factory=dict)
    cim: dict = field(default_factory=dict)
    penalty: dict = field(default_factory=dict)
    oracle_cap: int = 24
    backend: str | None = None

    def validate(self) -> None:
        if self.engine not in ENGINES:
            raise ParseError(f"engine must be one of {', '.join(ENGINES)}, got {self.engine!r}")
        if (self.input is None) == (self.generate is None):
            raise ParseError("exactly one of input and generate must be given")
        if self.format is not None and self.format not in FORMATS:
            raise ParseError(f"format must be one of {', '.join(FORMATS)}")
        if self.report not in ("json", "csv"):
            raise ParseError("report must be json or csv")
        if not 0 <= self.seed < 2**64:
            raise ParseError("seed must be a 64-bit unsigned integer")
        for name, keys in (("anneal", _ANNEAL_KEYS), ("cim", _CIM_KEYS), ("penalty", {"A", "B", "max_bits"})):
            bad = set(getattr(self, name)) - keys
            if bad:
                raise ParseError(f"unknown {name} parameter(s): {', '.join(sorted(bad))}")

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        bad = set(doc) - names - {"format_version"}
        if bad:
            raise ParseError(f"unknown config key(s): {', '.join(sorted(bad))}")
        return cls(**{k: v for k, v in doc.items() if k in names})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def anneal_params(self) -> AnnealParams:
        a = self.anneal
        sched = AnnealSchedule(
            t_start=a.get("t_start", 2.0), t_end=a.get("t_end", 0.05),
            sweeps=a.get("sweeps", 500), kind=a.get("schedule", "geometric"),
        )
        noise = NoiseConfig(a.get("p_input_invert", 0.0), a.get("p_output_invert", 0.0))
        return AnnealParams(
            schedule=sched, noise=noise, restarts=a.get("restarts", 50), seed=self.seed,
            update_rule=a.get("update_rule", "gibbs"), sweep_order=a.get("sweep_order", "sequential"),
        )

    def cim_params(self) -> CimParams:
        return CimParams(seed=self.seed, **self.cim)


def _load_instance(cfg: RunConfig):
    if cfg.generate is not None:
        spec = parse_generator_spec(cfg.generate, default_seed=cfg.seed)
        try:
            return generate(spec), str(spec)
        except ValueError as exc:
            raise ParseError(str(exc)) from None
    with open(cfg.input, encoding="utf-8") as fh:
        text = fh.read()
    fmt = cfg.format or detect_format(cfg.input, text)
    return parse_instance(text, fmt), cfg.input


def _run_engine(cfg: RunConfig, model: IsingModel):
    if cfg.engine == "anneal":
        return anneal(model, cfg.anneal_params(), backend=cfg.backend)
    if cfg.engine == "cim":
        return cim_solve(model, cfg.cim_params(), backend=cfg.backend)
    if cfg.engine == "greedy":
        start = chain_rng(cfg.seed, 0).integers(0, 2, size=model.num_spins) * 2 - 1
        rep = greedy_descent(model, start)
        rep.seed = cfg.seed
        return rep
    t0 = time.perf_counter()
    res = enumerate_ising(model, cap=cfg.oracle_cap, backend=cfg.backend)
    state = np.array(res.best_states[0], dtype=np.int8)
    return SolveReport(
        best_state=state, best_energy=energy(model, state), energy_trace=np.array([res.best_value]),
        accepted_flips=0, seed=cfg.seed, wall_time=time.perf_counter() - t0, engine="oracle",
        backend=_backend.name_of(_backend.get(cfg.backend)), info={"num_optimal_states": len(res.best_states), "states_examined": res.states_examined},
    )


def solve(cfg: RunConfig) -> tuple[dict, np.ndarray]:
    """Run the pipeline and return ``(report, trace)``; raises on failure."""
    cfg.validate()
    obj, source = _load_instance(cfg)
    doc: dict = {
        "format_version": FORMAT_VERSION,
        "isingopt_version": __version__,
        "config": cfg.to_dict(),
        "instance": {"source": source},
    }
    if isinstance(obj, BilpInstance):
        doc["instance"].update(kind="bilp", num_vars=obj.num_vars, num_constraints=len(obj.constraints))
        pen = cfg.penalty
        weights = PenaltyWeights(pen["A"], pen.get("B", 1.0)) if "A" in pen else None
        artifact = reduce(obj, weights, max_bits=pen.get("max_bits", 24))
        doc["reduction"] = artifact.summary()
        model = artifact.ising
    else:
        doc["instance"].update(kind="ising", num_spins=obj.num_spins)
        artifact = None
        model = obj
    if cfg.engine == "anneal":
        doc["params"] = dataclasses.asdict(cfg.anneal_params())
    elif cfg.engine == "cim":
        cp = cfg.cim_params()
        doc["params"] = {**dataclasses.asdict(cp), "coupling_strength": cp.epsilon(model.num_spins)}
    elif cfg.engine == "oracle":
        doc["params"] = {"cap": cfg.oracle_cap}
    else:
        doc["params"] = {"start": "uniform random spins from chain stream 0"}
    rep = _run_engine(cfg, model)
    result = rep.to_dict()
    wall = result.pop("wall_time")
    doc["result"] = result
    if artifact is not None:
        d = decode(artifact, rep.best_state)
        doc["solution"] = {
            "x": list(d.x),
            "objective": d.objective,
            "original_objective": 0.0 - d.objective if obj.maximize else d.objective,
            "direction": "maximize" if obj.maximize else "minimize",
            "feasible": d.feasible,
            "violation": d.violation,
        }
        if obj.names is not None:
            doc["solution"]["names"] = list(obj.names)
    doc["wall_time"] = wall
    return doc, rep.energy_trace


_CSV_FIELDS = ("engine", "seed", "num_spins", "best_energy", "accepted_flips", "trace_length",
               "objective", "original_objective", "feasible", "violation", "best_state", "x", "wall_time")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return "" if v is None else str(v)


def report_csv(doc: dict) -> str:
    res, sol = doc["result"], doc.get("solution", {})
    row = {
        "engine": res["engine"], "seed": res["seed"], "num_spins": len(res["best_state"]),
        "best_energy": res["best_energy"], "accepted_flips": res["accepted_flips"],
        "trace_length": res["trace_length"], "objective": sol.get("objective"),
        "original_objective": sol.get("original_objective"), "feasible": sol.get("feasible"),
        "violation": sol.get("violation"), "best_state": res["best_state"], "x": sol.get("x"),
        "wall_time": doc["wall_time"],
    }
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_CSV_FIELDS)
    w.writerow([_fmt(row[k]) for k in _CSV_FIELDS])
    return buf.getvalue()


def report_json(doc: dict) -> str:
    return json.dumps(doc, indent=1, allow_nan=True) + "\n"


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".isingopt-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _error_record(exc: BaseException, code: int) -> str:
    rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, ParseError):
        rec.update(line=exc.line, column=exc.column)
    if isinstance(exc, EngineDivergence):
        rec["step"] = exc.step
    return json.dumps(rec)


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ParseError, ModelError)):
        return EXIT_PARSE
    if isinstance(exc, ReductionError):
        return EXIT_REDUCTION
    if isinstance(exc, EngineDivergence):
        return EXIT_DIVERGENCE
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, ValueError) and not isinstance(exc, (IsingOptError,)):
        return EXIT_PARSE  # invalid engine parameters
    return EXIT_OTHER


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one configured run; returns the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        doc, trace = solve(cfg)
        text = report_json(doc) if cfg.report == "json" else report_csv(doc)
        if cfg.trace:
            lines = ["index,best_energy"] + [f"{k},{float(v)!r}" for k, v in enumerate(trace)]
            _write_atomic(cfg.trace, "\n".join(lines) + "\n")
        if cfg.out:
            _write_atomic(cfg.out, text)
        else:
            stdout.write(text)
    except (IsingOptError, OSError, ValueError) as exc:
        code = EXIT_OTHER if isinstance(exc, OracleCapError) else _exit_code(exc)
        stderr.write(_error_record(exc, code) + "\n")
        return code
    return EXIT_OK


def _add_solve_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run config; command-line flags override its values")
    p.add_argument("--engine", choices=ENGINES)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", metavar="FILE")
    src.add_argument("--generate", metavar="SPEC", help="e.g. knapsack:n=3,seed=1 or maxcut-ring:n=10")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--report", choices=("json", "csv"))
    p.add_argument("--trace", metavar="FILE", help="write the best-so-far energy series as CSV")
    p.add_argument("--backend", choices=("compiled", "python"))
    g = p.add_argument_group("anneal")
    g.add_argument("--sweeps", type=int)
    g.add_argument("--t-start", type=float)
    g.add_argument("--t-end", type=float)
    g.add_argument("--schedule", choices=("geometric", "linear"))
    g.add_argument("--restarts", type=int)
    g.add_argument("--update-rule", choices=("gibbs", "metropolis", "greedy"))
    g.add_argument("--sweep-order", choices=("sequential", "random"))
    g.add_argument("--p-input-invert", type=float)
    g.add_argument("--p-output-invert", type=float)
    g = p.add_argument_group("cim")
    g.add_argument("--pump-start", type=float)
    g.add_argument("--pump-end", type=float)
    g.add_argument("--ramp-steps", type=int)
    g.add_argument("--dt", type=float)
    g.add_argument("--coupling-strength", type=float)
    g.add_argument("--noise-amplitude", type=float)
    g.add_argument("--saturation", type=float)
    g.add_argument("--readout-every", type=int)
    g = p.add_argument_group("reduction / oracle")
    g.add_argument("--penalty-a", type=float)
    g.add_argument("--penalty-b", type=float)
    g.add_argument("--max-bits", type=int)
    g.add_argument("--oracle-cap", type=int)


def _config_from_args(args) -> RunConfig:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"config: {exc.msg}", exc.lineno, exc.colno) from None
        cfg = RunConfig.from_dict(doc)
    else:
        cfg = RunConfig()
    for name in ("engine", "format", "seed", "out", "report", "trace", "backend", "oracle_cap"):
        v = getattr(args, name)
        if v is not None:
            setattr(cfg, name, v)
    if args.input is not None:
        cfg.input, cfg.generate = args.input, None
    elif args.generate is not None:
        cfg.input, cfg.generate = None, args.generate
    for key in ("sweeps", "t_start", "t_end", "schedule", "restarts", "update_rule", "sweep_order",
                "p_input_invert", "p_output_invert"):
        v = getattr(args, key)
        if v is not None:
            cfg.anneal[key] = v
    for key in ("pump_start", "pump_end", "ramp_steps", "dt", "coupling_strength", "noise_amplitude",
                "saturation", "readout_every"):
        v = getattr(args, key)
        if v is not None:
            cfg.cim[key] = v
    for key, arg in (("A", "penalty_a"), ("B", "penalty_b"), ("max_bits", "max_bits")):
        v = getattr(args, arg)
        if v is not None:
            cfg.penalty[key] = v
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="isingopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"isingopt {__version__} ({_backend.BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_solve_args(sub.add_parser("solve", help="solve an instance file or generated instance"))
    gp = sub.add_parser("generate", help="write a generated instance to a file")
    gp.add_argument("spec", help="kind[:key=value,...], kinds: maxcut-random, maxcut-ring, knapsack, "
                    "random-bilp, ising-random")
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--format", choices=FORMATS)
    gp.add_argument("--out", metavar="FILE")
    args = parser.parse_args(argv)

    if args.command == "generate":
        try:
            obj = generate(parse_generator_spec(args.spec, default_seed=args.seed))
            fmt = args.format or ("ising-json" if isinstance(obj, IsingModel) else "bilp-json")
            if isinstance(obj, IsingModel) != (fmt == "ising-json"):
                raise ParseError(f"a {type(obj).__name__} cannot be written as {fmt}")
            text = dumps_instance(obj, fmt)
            if args.out:
                _write_atomic(args.out, text)
            else:
                sys.stdout.write(text)
        except (IsingOptError, OSError, ValueError) as exc:
            code = _exit_code(exc)
            sys.stderr.write(_error_record(exc, code) + "\n")
            return code
        return EXIT_OK

    try:
        cfg = _config_from_args(args)
    except (IsingOptError, OSError, ValueError, TypeError) as exc:
        code = EXIT_IO if isinstance(exc, OSError) else EXIT_PARSE
        sys.stderr.write(_error_record(exc, code) + "\n")
        return code
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
