import re
import xml.etree.ElementTree as ET

import pytest

from rrselect.experiment import ExperimentRecord, write_records
from rrselect.plots import line_chart, plot, scatter_chart


def _records():
    out = []
    for sweep in (2, 4, 6):
        for seed in range(2):
            for method, its in (("m1", sweep), ("m2", 2)):
                status = "optimal" if sweep < 6 else "time-limit"
                out.append(ExperimentRecord(f"i-{sweep}-{seed}", seed, sweep, method, status,
                                            10.0 * sweep + seed, its, 7, 7 if status == "optimal"
                                            else 5, 7))
    return out


def test_chart_files(tmp_path):
    write_records(_records(), tmp_path / "results.csv")
    written = plot(tmp_path / "results.csv", tmp_path / "figs", time_limit=1.0)
    names = sorted(p.name for p in written)
    assert names == ["iterations.svg", "scatter.svg", "solved.svg", "time.svg"]
    for path in written:
        ET.fromstring(path.read_text())       # well-formed XML
    solved = (tmp_path / "figs" / "solved.svg").read_text()
    assert "m1,6,0.0" in solved and "m2,2,1.0" in solved
    time_svg = (tmp_path / "figs" / "time.svg").read_text()
    assert "m1,6,1000.0" in time_svg        # unsolved runs count at the limit
    iterations = (tmp_path / "figs" / "iterations.svg").read_text()
    assert "stroke-dasharray" in iterations  # reference line at two iterations


def test_single_point(tmp_path):
    write_records([ExperimentRecord("a", 0, 3, "m1", "optimal", 5.0, 2, 1, 1, 1)],
                  tmp_path / "r.csv")
    written = plot(tmp_path / "r.csv", tmp_path)
    svg = (tmp_path / "solved.svg").read_text()
    ET.fromstring(svg)
    assert len(re.findall("<circle", svg)) == 2   # the data point and its legend marker
    assert "scatter.svg" not in {p.name for p in written}


def test_scatter_has_diagonal():
    svg = scatter_chart([(1.0, 2.0), (30.0, 10.0)], "t", "a", "b")
    ET.fromstring(svg)
    assert 'class="diagonal"' in svg
    assert svg.count("<circle") == 2


def test_empty_inputs(tmp_path):
    write_records([], tmp_path / "empty.csv")
    with pytest.raises(ValueError):
        plot(tmp_path / "empty.csv", tmp_path)
    with pytest.raises(ValueError):
        line_chart({}, "t", "x", "y")
