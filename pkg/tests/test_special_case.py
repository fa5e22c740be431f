import pytest
from hypothesis import given, settings, strategies as st

import oracles
from rrselect.adversary import adv_solve
from rrselect.core import Instance, InstanceError
from rrselect.generators import random_pair, random_small
from rrselect.incremental import inc_solve, iter_first_stage
from rrselect.special_case import adv_closed_form, analyze, solve_special


def test_strategy_parts_of_running_example(ex1):
    a = analyze(ex1, ex1.selection([1, 4]))
    assert (a.j_star, a.b_star, a.g1, a.i_star, a.g2) == (0, 1, 3, 1, 8)
    a = analyze(ex1, ex1.selection([1, 3]))
    assert (a.j_star, a.b_star, a.g1, a.g2) == (1, 0, 2, 2)


def test_closed_form_values(ex1):
    assert adv_closed_form(ex1, ex1.selection([1, 4])) == 19
    assert adv_closed_form(ex1, ex1.selection([1, 3])) == 16


def test_optimum_of_running_example(ex1):
    assert solve_special(ex1) == (25, ex1.selection([1, 3]))


def test_rejects_other_shapes(ex1, ex2):
    with pytest.raises(InstanceError):
        solve_special(ex2)
    with pytest.raises(InstanceError):
        solve_special(ex1.with_budgets(gamma=0))
    with pytest.raises(InstanceError):
        adv_closed_form(ex1.with_budgets(k=0), ex1.selection([1, 3]))


def test_single_part():
    inst = Instance(((0, 1),), (1,), (3, 0), (1, 5), (4, 2), 1, 1)
    assert solve_special(inst)[0] == oracles.rec_value(inst)


@st.composite
def pair_instances(draw, max_parts=4, max_cost=15):
    K = draw(st.integers(1, max_parts))
    col = st.lists(st.integers(0, max_cost), min_size=2 * K, max_size=2 * K)
    parts = tuple((2 * j, 2 * j + 1) for j in range(K))
    return Instance(parts, (1,) * K, tuple(draw(col)), tuple(draw(col)), tuple(draw(col)), 1, 1)


@settings(max_examples=120, deadline=None)
@given(pair_instances())
def test_optimum_matches_definition(inst):
    value, x = solve_special(inst)
    assert value == oracles.rec_value(inst)
    assert sum(c * v for c, v in zip(inst.C, x)) + oracles.adv_value(inst, x) == value


@settings(max_examples=120, deadline=None)
@given(pair_instances())
def test_gain_decomposition(inst):
    for x in iter_first_stage(inst):
        a = analyze(inst, x)
        assert oracles.adv_value(inst, x) - inc_solve(inst, x).value == max(a.g1, a.g2)


def test_closed_form_on_larger_parts():
    seen = 0
    for seed in range(400):
        inst = random_small(seed, p_min=1).with_budgets(gamma=1, k=1)
        if any(pj != 1 for pj in inst.p) or inst.k != 1 or inst.gamma != 1:
            continue
        for x in iter_first_stage(inst):
            assert adv_closed_form(inst, x) == adv_solve(inst, x).value
            seen += 1
    assert seen > 50


def test_seeded_pairs_against_enumeration():
    for seed in range(40):
        inst = random_pair(seed, K_max=5)
        assert solve_special(inst)[0] == oracles.rec_value(inst)
