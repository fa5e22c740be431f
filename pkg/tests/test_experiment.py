import csv

import pytest

from rrselect.core import ParseError
from rrselect.experiment import (COLUMNS, ExperimentConfig, ExperimentRecord, method_disagreements,
                                 parse_config, read_records, run_experiment, run_records,
                                 summarize, truncated_time_ms)

CONFIG = """format-version: 1
# desk-scale sweep
family: "i2"
sweep: {"K": [2, 4]}
replications: 3
seed: 5
methods: ["brute", "m1", "m2", "special"]
time_limit: 30
workers: 1
"""


def test_config_parsing():
    cfg = parse_config(CONFIG)
    assert cfg.sweep_name == "K" and cfg.sweep_values == (2, 4)
    assert len(cfg.jobs()) == 6
    with pytest.raises(ParseError, match="time limit"):
        parse_config(CONFIG.replace("time_limit: 30", "time_limit: 0"))
    with pytest.raises(ParseError, match="replications"):
        parse_config(CONFIG.replace("replications: 3", "replications: 0"))
    with pytest.raises(ParseError) as err:
        parse_config(CONFIG.replace("workers", "threads"))
    assert err.value.field == "threads"
    with pytest.raises(ParseError, match="methods"):
        parse_config(CONFIG.replace('"special"', '"cplex"'))


def test_builtin_instance_run(tmp_path):
    cfg = ExperimentConfig(instances=("builtin:ex1",), methods=("m1", "m2"), time_limit=10)
    records, summary, errors = run_experiment(cfg, tmp_path)
    assert not errors
    assert [(r.method, r.status, r.value) for r in records] == [("m1", "optimal", 25),
                                                                ("m2", "optimal", 25)]
    with open(tmp_path / "results.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == COLUMNS
    assert read_records(tmp_path / "results.csv") == records


def test_records_are_consistent_and_methods_agree():
    records, errors = run_records(parse_config(CONFIG))
    assert not errors
    # special only applies to pair instances, so no record for it here
    assert {r.method for r in records} == {"brute", "m1", "m2"}
    for r in records:
        assert r.status == "optimal" and r.lb == r.ub == r.value
    assert not method_disagreements(records)
    by_k = {row["sweep"]: row for row in summarize(records, 30) if row["method"] == "m1"}
    assert by_k[2]["runs"] == by_k[4]["runs"] == 3


def test_parallel_run_gives_same_records():
    serial, _ = run_records(parse_config(CONFIG))
    parallel, _ = run_records(parse_config(CONFIG.replace("workers: 1", "workers: 2")))
    strip = [(r.instance_id, r.method, r.status, r.value, r.lb, r.ub, r.iterations) for r in serial]
    assert strip == [(r.instance_id, r.method, r.status, r.value, r.lb, r.ub, r.iterations)
                     for r in parallel]


def test_forced_truncation():
    cfg = ExperimentConfig(family="i1", base={"K": 5, "n_j": 5}, sweep_name="gamma",
                           sweep_values=(8,), replications=3, methods=("m1", "m2"),
                           time_limit=0.001)
    records, _ = run_records(cfg)
    truncated = [r for r in records if r.status == "time-limit"]
    assert truncated
    for r in truncated:
        assert r.lb <= r.ub == r.value


def test_truncated_time_average():
    def rec(status, ms):
        return ExperimentRecord("i", 0, 1, "m1", status, ms, 2, 1, 1, 1)
    records = [rec("optimal", 100.0), rec("time-limit", 2500.0), rec("optimal", 300.0)]
    assert truncated_time_ms(records, 2.0) == pytest.approx((100 + 2000 + 300) / 3)
    assert truncated_time_ms(records, None) == pytest.approx((100 + 2500 + 300) / 3)


def test_missing_instance_is_recorded_not_fatal(tmp_path):
    cfg = ExperimentConfig(instances=("builtin:ex1", str(tmp_path / "nope.txt")), methods=("m2",))
    records, errors = run_records(cfg)
    assert {r.instance_id: r.status for r in records} == {"builtin:ex1": "optimal",
                                                          cfg.instances[1]: "error"}
    assert len(errors) == 1
