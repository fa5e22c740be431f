import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from rrselect.core import Instance
from rrselect.generators import builtin

DATA = Path(__file__).parent / "data"


@pytest.fixture
def ex1():
    return builtin("ex1")


@pytest.fixture
def ex2():
    return builtin("ex2")


@st.composite
def small_instances(draw, max_parts=3, max_part_size=3, max_cost=12, max_gamma=3, max_k=2):
    sizes = draw(st.lists(st.integers(1, max_part_size), min_size=1, max_size=max_parts))
    n = sum(sizes)
    order = draw(st.permutations(range(n)))
    parts, start = [], 0
    for size in sizes:
        parts.append(tuple(sorted(order[start:start + size])))
        start += size
    p = tuple(draw(st.integers(0, size)) for size in sizes)
    col = st.lists(st.integers(0, max_cost), min_size=n, max_size=n)
    return Instance(tuple(parts), p, tuple(draw(col)), tuple(draw(col)), tuple(draw(col)),
                    draw(st.integers(0, max_gamma)), draw(st.integers(0, max_k)))


@st.composite
def instance_with_selection(draw, **kwargs):
    inst = draw(small_instances(**kwargs))
    x = [0] * inst.n
    for part, pj in zip(inst.parts, inst.p):
        for i in draw(st.permutations(part))[:pj]:
            x[i] = 1
    return inst, tuple(x)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
