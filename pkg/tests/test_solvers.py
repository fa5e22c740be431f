import pytest
from hypothesis import given, settings

import oracles
from conftest import small_instances
from rrselect.adversary import adversary_value
from rrselect.core import Scenario
from rrselect.generators import random_small
from rrselect.incremental import EnumerationLimitError, inc_solve, iter_first_stage
from rrselect.solvers import (FirstStageSpace, Limits, full_candidate_pool, full_scenario_pool,
                              initial_candidate, master_exhaustive, rec_brute, solve_m1, solve_m2)


def test_running_example_all_methods(ex1):
    best = ex1.selection([1, 3])
    for mode in ("auto", "dp", "brute", "scenarios"):
        assert rec_brute(ex1, mode) == (25, best)
    for solve in (solve_m1, solve_m2):
        value, x, log = solve(ex1)
        assert (value, x) == (25, best)
        assert log.status == "optimal" and log.lower == log.upper == 25


def test_candidate_totals(ex1):
    totals = {tuple(x): sum(c * v for c, v in zip(ex1.C, x)) + adversary_value(ex1, x)
              for x in iter_first_stage(ex1)}
    assert totals[ex1.selection([1, 3])] == 25
    assert totals[ex1.selection([1, 4])] == 27
    assert totals[ex1.selection([2, 4])] == 28
    assert sorted(totals.values()).count(25) == 1


def test_masters_on_running_example(ex1):
    assert master_exhaustive(ex1, [Scenario()]) == (19, ex1.selection([1, 4]))
    assert master_exhaustive(ex1, full_scenario_pool(ex1))[0] == 25
    assert master_exhaustive(ex1, full_candidate_pool(ex1), kind="cut")[0] == 25
    assert master_exhaustive(ex1, [initial_candidate(ex1)], kind="cut")[0] <= 25


def test_vectorised_values_match_scalar(ex1):
    space = FirstStageSpace(ex1)
    costs = Scenario({3}).costs(ex1)
    col = space.inc_values(costs)
    for row in range(space.size):
        assert col[row] == inc_solve(ex1, space.vector(row), costs).value


def test_iteration_trace(ex1):
    _, _, log = solve_m1(ex1)
    rows = list(log.rows())
    assert [r["lb"] for r in rows] == [19, 25]
    assert rows[0]["x"] == [1, 4] and rows[0]["generated"] == "4"
    assert rows[-1]["generated"] is None
    assert [type(p).__name__ for p in log.pool] == ["Scenario", "Scenario"]


def test_zero_budget_stops_after_nominal_master(ex1):
    inst = ex1.with_budgets(gamma=0)
    expected = min(sum(c * v for c, v in zip(inst.C, x)) + inc_solve(inst, x).value
                   for x in iter_first_stage(inst))
    for solve in (solve_m1, solve_m2):
        value, _, log = solve(inst)
        assert value == expected
        assert len(log.iterations) == 1


def test_zero_budget_candidate_loop_still_converges():
    inst = random_small(300_002).with_budgets(gamma=0)
    exact = rec_brute(inst)[0]
    value, _, log = solve_m2(inst, shortcut=False)
    assert value == exact and len(log.iterations) == 2
    assert all(not isinstance(c, Scenario) for c in log.pool)
    value, _, log = solve_m2(inst)
    assert value == exact and log.pool == [Scenario()]


def test_full_budget_needs_two_masters(ex1):
    inst = ex1.with_budgets(gamma=4)
    value, _, log = solve_m1(inst)
    assert value == rec_brute(inst)[0]
    assert len(log.iterations) == 2


def test_iteration_limit_reports_valid_bounds():
    from rrselect.generators import GeneratorSpec, gen_random
    inst = gen_random(GeneratorSpec(family="i1", K=4, n_j=4, gamma=6, seed=3))
    exact = solve_m2(inst)[0]
    for solve in (solve_m1, solve_m2):
        value, _, log = solve(inst, Limits(max_iter=1))
        if log.status == "time-limit":
            assert log.lower <= exact <= log.upper == value
        else:
            assert log.lower == log.upper == exact


def test_enumeration_bound(ex1):
    with pytest.raises(EnumerationLimitError):
        rec_brute(ex1, limit=2)
    with pytest.raises(EnumerationLimitError):
        solve_m1(ex1, Limits(enumeration=2))


@settings(max_examples=80, deadline=None)
@given(small_instances())
def test_methods_match_definition(inst):
    expected = oracles.rec_value(inst)
    assert rec_brute(inst)[0] == expected
    assert rec_brute(inst, "dp")[0] == expected
    for solve in (solve_m1, solve_m2):
        value, x, log = solve(inst)
        assert value == expected
        assert sum(c * v for c, v in zip(inst.C, x)) + oracles.adv_value(inst, x) == expected
        lows = [it.lower for it in log.iterations]
        assert lows == sorted(lows)
        assert all(it.lower <= expected <= it.upper for it in log.iterations)
        generated = [it.generated for it in log.iterations[:-1]]
        keys = [g.attacked if isinstance(g, Scenario) else g.key() for g in generated]
        assert len(keys) == len(set(keys))
