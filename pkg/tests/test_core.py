from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import small_instances
from rrselect.core import (Instance, InstanceError, ParseError, Scenario, check_selection,
                           first_stage_cost, read_instance, validate, write_instance)


def test_running_example_is_valid(ex1):
    report = validate(ex1)
    assert report.ok and not report.warnings
    assert ex1.n == 4 and ex1.K == 2 and ex1.P == 2
    assert ex1.c_upper == (19, 17, 19, 13)
    assert ex1.d == (9, 10, 10, 9)


def test_overlapping_parts_reported():
    inst = Instance(((0, 1), (1, 2)), (1, 1), (1, 1, 1), (0, 0, 0), (0, 0, 0), 0, 0)
    assert any(v.startswith("parts overlap") for v in validate(inst).violations)


def test_quota_above_part_size_reported():
    inst = Instance(((0, 1), (2, 3)), (3, 1), (1,) * 4, (0,) * 4, (0,) * 4, 1, 1)
    assert any(v.startswith("quota exceeds part size") for v in validate(inst).violations)


def test_negative_cost_and_uncovered_items_reported():
    inst = Instance(((0,),), (1,), (1, 2), (-1, 0), (0, 0), 0, 0)
    msgs = " | ".join(validate(inst).violations)
    assert "negative cost in c_lower" in msgs
    assert "items not covered" in msgs


def test_budgets_are_clamped_with_a_warning():
    inst = Instance(((0, 1),), (1,), (1, 2), (0, 0), (1, 1), 5, 4)
    assert inst.gamma == 2 and inst.k == 1
    assert len(validate(inst).warnings) == 2


def test_non_integer_costs_rejected():
    with pytest.raises(InstanceError):
        Instance(((0,),), (1,), (1.5,), (0,), (0,), 0, 0)
    with pytest.raises(InstanceError):
        Instance(((0,),), (1,), (True,), (0,), (0,), 0, 0)


def test_first_stage_cost(ex1):
    assert first_stage_cost(ex1, ex1.selection([1, 4])) == 8
    assert first_stage_cost(ex1, ex1.selection([1, 3])) == 9
    zero = Instance(ex1.parts, ex1.p, (0,) * 4, ex1.c_lower, ex1.d, 1, 1)
    assert first_stage_cost(zero, zero.selection([2, 3])) == 0
    with pytest.raises(InstanceError):
        first_stage_cost(ex1, ex1.selection([1, 2]))


def test_fractional_selection_checked_exactly(ex2):
    third = Fraction(1, 3)
    x = (third, third, third, 2 * third, third)
    check_selection(ex2, x, fractional=True)
    assert first_stage_cost(ex2, x) == third
    with pytest.raises(InstanceError):
        check_selection(ex2, x)


def test_scenario_costs(ex1):
    assert Scenario({3}).costs(ex1) == (10, 7, 9, 13)
    assert Scenario().costs(ex1) == ex1.c_lower
    with pytest.raises(InstanceError):
        Scenario({0, 1}).costs(ex1)


def test_round_trip_examples(ex1, ex2):
    for inst in (ex1, ex2):
        text = write_instance(inst)
        assert text.startswith("format-version: 1\n")
        assert read_instance(text) == inst
        assert write_instance(read_instance(text)) == text


def test_file_uses_one_based_labels(ex1):
    assert "parts: [[1, 2], [3, 4]]" in write_instance(ex1)


@settings(max_examples=60, deadline=None)
@given(small_instances())
def test_round_trip_property(inst):
    assert read_instance(write_instance(inst)) == inst


def test_parse_errors_name_field_and_line(ex1):
    text = write_instance(ex1).replace("gamma:", "gama:")
    with pytest.raises(ParseError) as err:
        read_instance(text)
    assert err.value.field == "gama" and err.value.line == 9
    assert "gama" in str(err.value)


def test_parse_errors_for_header_and_values(ex1):
    body = write_instance(ex1)
    with pytest.raises(ParseError, match="format-version"):
        read_instance(body.split("\n", 1)[1])
    with pytest.raises(ParseError, match="malformed"):
        read_instance(body.replace("C: [1, 5, 8, 7]", "C: [1, 5,"))
    with pytest.raises(ParseError, match="duplicate"):
        read_instance(body + "k: 1\n")
    with pytest.raises(ParseError, match="missing"):
        read_instance(body.replace("k: 1\n", ""))
    with pytest.raises(ParseError, match="integers"):
        read_instance(body.replace("C: [1, 5, 8, 7]", "C: [1, 5, 8.5, 7]"))
    with pytest.raises(ParseError, match="overlap"):
        read_instance(body.replace("[[1, 2], [3, 4]]", "[[1, 2], [2, 4]]"))
