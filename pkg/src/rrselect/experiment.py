"""Batch experiments: generate instances, run solvers under a time limit, write CSV.

A config file uses the instance-file dialect (``format-version: 1`` then
``key: <json>`` lines). Recognised keys::

    family        "i1" | "i2"             generator family for the sweep
    base          {"K": 5, "n_j": 5, ...}  fixed generator parameters
    sweep         {"gamma": [2, 3, 4]}     exactly one swept parameter
    replications  20                      seeds per sweep point
    seed          0                       first seed
    instances     ["builtin:ex1", ...]    fixed instances (alternative to a sweep)
    methods       ["m1", "m2"]            subset of brute, m1, m2, special
    time_limit    60                      seconds per run, checked between iterations
    output        "results"               output directory
    workers       1                       parallel processes (0 = all cores)
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .core import Instance, InstanceError, ParseError, load_instance, parse_fields
from .generators import GeneratorSpec, builtin, gen_random
from .incremental import DEFAULT_ENUMERATION_LIMIT, count_first_stage
from .solvers import Limits, rec_brute, solve_m1, solve_m2
from .special_case import solve_special

METHODS = ("brute", "m1", "m2", "special")
COLUMNS = ("instance_id", "seed", "sweep", "method", "status", "time_ms", "iterations",
           "value", "lb", "ub")
CONFIG_KEYS = ("family", "base", "sweep", "replications", "seed", "instances", "methods",
               "time_limit", "output", "workers")


@dataclass
class ExperimentConfig:
    family: str = "i1"
    base: dict = field(default_factory=dict)
    sweep_name: str = None
    sweep_values: tuple = ()
    replications: int = 1
    seed: int = 0
    instances: tuple = ()
    methods: tuple = ("m1", "m2")
    time_limit: float = 60.0
    output: str = "results"
    workers: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise InstanceError("replications must be at least 1")
        if not self.time_limit > 0:
            raise InstanceError("time limit must be positive")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown or not self.methods:
            raise InstanceError(f"methods must be a nonempty subset of {METHODS}")
        if not self.instances and self.sweep_name is None:
            raise InstanceError("config needs either 'instances' or a 'sweep'")

    def jobs(self):
        """Every ``(instance_id, seed, sweep value, instance reference)`` to run."""
        out = [(ref, "", "", ref) for ref in self.instances]
        if self.sweep_name is not None:
            base = GeneratorSpec(family=self.family, **self.base)
            for value in self.sweep_values:
                for r in range(self.replications):
                    seed = self.seed + r
                    spec = replace(base, seed=seed, **{self.sweep_name: value})
                    out.append((f"{self.family}-{self.sweep_name}{value}-s{seed}", seed, value, spec))
        return out


def parse_config(text: str) -> ExperimentConfig:
    raw = parse_fields(text, CONFIG_KEYS)
    lines = raw.pop("__lines__")
    kwargs = {}
    for key, value in raw.items():
        if key == "sweep":
            if not isinstance(value, dict) or len(value) != 1:
                raise ParseError("sweep must map exactly one parameter to a list",
                                 line=lines[key], field=key)
            (name, values), = value.items()
            if name not in ("gamma", "K", "k", "n_j"):
                raise ParseError(f"cannot sweep {name!r}", line=lines[key], field=key)
            kwargs["sweep_name"], kwargs["sweep_values"] = name, tuple(values)
        elif key in ("instances", "methods"):
            kwargs[key] = tuple(value)
        elif key == "base":
            if not isinstance(value, dict):
                raise ParseError("base must be an object", line=lines[key], field=key)
            if "cost_range" in value:
                value = dict(value, cost_range=tuple(value["cost_range"]))
            kwargs[key] = value
        else:
            kwargs[key] = value
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, InstanceError) as exc:
        raise ParseError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def resolve_instance(ref) -> Instance:
    """``builtin:<name>``, a generator spec, or an instance file path."""
    if isinstance(ref, Instance):
        return ref
    if isinstance(ref, GeneratorSpec):
        return gen_random(ref)
    if ref.startswith("builtin:"):
        return builtin(ref.split(":", 1)[1])
    return load_instance(ref)


@dataclass(frozen=True)
class ExperimentRecord:
    instance_id: str
    seed: object
    sweep: object
    method: str
    status: str
    time_ms: float
    iterations: int
    value: object
    lb: object
    ub: object

    def row(self):
        return {c: ("" if getattr(self, c) is None else getattr(self, c)) for c in COLUMNS}


def applicable(instance: Instance, method: str, limit=DEFAULT_ENUMERATION_LIMIT) -> bool:
    """Brute force only below the enumeration bound; the special case only on its shape."""
    if method == "brute":
        return count_first_stage(instance) <= limit
    if method == "special":
        return instance.is_pair_instance()
    return True


def run_one(instance: Instance, method: str, time_limit=math.inf):
    """``(status, time_ms, iterations, value, lb, ub)`` for one run."""
    start = time.monotonic()
    if method in ("m1", "m2"):
        solve = solve_m1 if method == "m1" else solve_m2
        value, _, log = solve(instance, Limits(time_limit=time_limit))
        ms = (time.monotonic() - start) * 1000
        return log.status, ms, len(log.iterations), value, log.lower, log.upper
    value, _ = rec_brute(instance) if method == "brute" else solve_special(instance)
    ms = (time.monotonic() - start) * 1000
    return "optimal", ms, 0, value, value, value


def _run_job(job, methods, time_limit):
    instance_id, seed, sweep_value, ref = job
    records = []
    try:
        instance = resolve_instance(ref)
    except (InstanceError, ParseError, OSError) as exc:
        return [ExperimentRecord(instance_id, seed, sweep_value, m, "error", 0.0, 0, None, None,
                                 None) for m in methods], [f"{instance_id}: {exc}"]
    errors = []
    for method in methods:
        if not applicable(instance, method):
            continue
        try:
            status, ms, its, value, lb, ub = run_one(instance, method, time_limit)
        except Exception as exc:  # recorded, the batch goes on
            errors.append(f"{instance_id}/{method}: {exc}")
            records.append(ExperimentRecord(instance_id, seed, sweep_value, method, "error", 0.0, 0,
                                            None, None, None))
            continue
        records.append(ExperimentRecord(instance_id, seed, sweep_value, method, status,
                                        round(ms, 3), its, value, lb, ub))
    return records, errors


def _sort_key(rec):
    sweep = rec.sweep if rec.sweep != "" else -math.inf
    seed = rec.seed if rec.seed != "" else -1
    return (sweep, seed, rec.instance_id, METHODS.index(rec.method))


def run_records(config: ExperimentConfig):
    """All records, sorted by (sweep, seed, instance, method) whatever the worker count."""
    jobs = config.jobs()
    workers = config.workers or os.cpu_count() or 1
    records, errors = [], []
    if workers == 1 or len(jobs) <= 1:
        results = [_run_job(job, config.methods, config.time_limit) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_job, job, config.methods, config.time_limit) for job in jobs]
            results = [f.result() for f in futures]
    for recs, errs in results:
        records.extend(recs)
        errors.extend(errs)
    records.sort(key=_sort_key)
    return records, errors


def truncated_time_ms(records, time_limit):
    """Average wall time where every run that is not optimal counts as the full limit.

    With ``time_limit=None`` such runs count with their recorded time.
    """
    if not records:
        return math.nan
    total = 0.0
    for r in records:
        total += r.time_ms if r.status == "optimal" or time_limit is None else time_limit * 1000
    return total / len(records)


def summarize(records, time_limit):
    """Per ``(method, sweep)``: run count, fraction solved, truncated mean time, mean iterations."""
    groups = {}
    for r in records:
        groups.setdefault((r.method, r.sweep), []).append(r)
    rows = []
    for (method, sweep), recs in sorted(groups.items(),
                                        key=lambda kv: (METHODS.index(kv[0][0]), _sweep_key(kv[0][1]))):
        rows.append({
            "method": method, "sweep": sweep, "runs": len(recs),
            "solved": sum(r.status == "optimal" for r in recs) / len(recs),
            "time_ms": truncated_time_ms(recs, time_limit),
            "iterations": sum(r.iterations for r in recs) / len(recs),
        })
    return rows


def _sweep_key(value):
    return -math.inf if value == "" else value


def method_disagreements(records):
    """Instances where two methods both claim optimality but report different values."""
    by_instance = {}
    for r in records:
        if r.status == "optimal":
            by_instance.setdefault(r.instance_id, {})[r.method] = r.value
    return {i: v for i, v in by_instance.items() if len(set(v.values())) > 1}


def write_records(records, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in records:
            writer.writerow(r.row())


def read_records(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"{path}: expected columns {','.join(COLUMNS)}")
        out = []
        for row in reader:
            out.append(ExperimentRecord(
                row["instance_id"], _maybe_int(row["seed"]), _maybe_int(row["sweep"]), row["method"],
                row["status"], float(row["time_ms"]), int(row["iterations"]),
                _maybe_int(row["value"]), _maybe_int(row["lb"]), _maybe_int(row["ub"])))
    return out


def _maybe_int(text):
    if text == "":
        return ""
    try:
        return int(text)
    except ValueError:
        return float(text)


def write_summary(rows, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=("method", "sweep", "runs", "solved", "time_ms",
                                                "iterations"), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (round(v, 3) if isinstance(v, float) else v) for k, v in row.items()})


def run_experiment(config: ExperimentConfig, output=None):
    """Run, then write ``results.csv`` and ``summary.csv``; returns ``(records, summary, errors)``."""
    out = Path(output or config.output)
    records, errors = run_records(config)
    write_records(records, out / "results.csv")
    summary = summarize(records, config.time_limit)
    write_summary(summary, out / "summary.csv")
    return records, summary, errors
