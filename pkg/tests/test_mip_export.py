import os
import sys
import warnings
from fractions import Fraction

import pytest

from conftest import DATA
from rrselect.adversary import CutCandidate, beta_candidates
from rrselect.core import Scenario
from rrselect.generators import builtin, random_small
from rrselect.mip_export import (ExternalSolution, ExternalSolverError, ModelError, ModelSizeError,
                                 SolutionParseError, bracket_coefficients, build_m1, build_m2,
                                 build_m3, m3_size, read_lp, read_solution, run_external,
                                 selection_from, solve_highs, write_lp, write_solution)
from rrselect.solvers import (full_candidate_pool, full_scenario_pool, initial_candidate,
                              master_exhaustive, rec_brute, solve_m1, solve_m2)

BRIDGE = f"{sys.executable} -m rrselect.highs_bridge {{model}} {{solution}}"


def test_golden_lp(ex1):
    text = write_lp(build_m1(ex1, [Scenario()]))
    assert text == (DATA / "ex1_m1_nominal.lp").read_text(encoding="utf-8")


def test_lp_text_is_deterministic(ex1):
    pool = full_scenario_pool(ex1)
    assert write_lp(build_m1(ex1, pool)) == write_lp(build_m1(ex1, list(pool)))
    assert write_lp(build_m3(ex1)) == write_lp(build_m3(builtin("ex1")))


def test_m1_shape(ex1):
    model = build_m1(ex1, [Scenario()])
    assert len(model.variables) == 4 + 2 * 4 + 1
    assert len(model.binaries) == 12
    # one cost row, two first-stage quotas, two recovery quotas, 4 + 4 links, one kept-count row
    assert len(model.constraints) == 14
    two = build_m1(ex1, [Scenario(), Scenario({3})])
    assert len(two.variables) == ex1.n + 2 * ex1.n * 2 + 1
    with pytest.raises(ModelError):
        build_m1(ex1, [])


def test_bracket_identity():
    for alpha in range(-3, 6):
        for beta in range(0, 4):
            for lo in range(0, 4):
                for dev in range(0, 4):
                    (b0, bs), (g0, gs) = bracket_coefficients(alpha, beta, lo, dev)
                    for x in (0, 1):
                        a = alpha + beta * x - lo
                        assert b0 + bs * x == max(a, 0)
                        assert g0 + gs * x == max(a, 0) - max(a - dev, 0)


def test_m2_zero_candidate_has_zero_constants(ex1):
    model = build_m2(ex1, [CutCandidate(0, (0, 0))])
    cut = next(c for c in model.constraints if c.name == "cut1")
    assert cut.rhs == 0
    assert {v for v, _ in cut.terms} == {"t", "pi1", "rho1_1", "rho1_2", "rho1_3", "rho1_4"}
    with pytest.raises(ModelError):
        build_m2(ex1, [])


def test_m2_matches_combinatorial_master(ex1):
    pool = [CutCandidate(0, (7, 4))]
    model = build_m2(ex1, pool)
    assert solve_highs(model).rounded == master_exhaustive(ex1, pool, kind="cut")[0]


def test_full_pools_model_the_optimum(ex1):
    assert solve_highs(build_m1(ex1, full_scenario_pool(ex1))).rounded == 25
    assert solve_highs(build_m2(ex1, full_candidate_pool(ex1))).rounded == 25


def test_compact_model(ex1):
    model = build_m3(ex1)
    assert model.metadata["betas"] == len(beta_candidates(ex1)) == 14
    assert len(model.variables) == m3_size(ex1)
    sol = solve_highs(model)
    assert sol.rounded == 25
    assert selection_from(sol, ex1) == ex1.selection([1, 3])


def test_compact_model_without_budget(ex1):
    inst = ex1.with_budgets(gamma=0)
    model = build_m3(inst)
    assert not any(v.startswith("s") and v.endswith("_1") for v in model.variables)
    assert solve_highs(model).rounded == rec_brute(inst)[0]


def test_integrality_gap_witness(ex2):
    model = build_m3(ex2)
    assert solve_highs(model).rounded == 1
    third = Fraction(1, 3)
    fixed = dict(zip(("x1", "x2", "x3", "x4", "x5"), (third, third, third, 2 * third, third)))
    relaxed = solve_highs(model, relax=True, fix=fixed)
    assert relaxed.objective <= 1 / 3 + 1e-6


def test_size_guard(ex1):
    with pytest.raises(ModelSizeError):
        build_m3(ex1, max_variables=100)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        build_m3(ex1, max_variables=100, allow_large=True)
    assert caught


def test_lp_round_trip(ex1, ex2):
    for model in (build_m1(ex1, full_scenario_pool(ex1)), build_m2(ex1, [initial_candidate(ex1)]),
                  build_m3(ex1), build_m3(ex2)):
        text = write_lp(model)
        again = read_lp(text)
        assert write_lp(again) == text
        assert again.formulation == model.formulation


def test_lp_wraps_long_rows(ex1):
    text = write_lp(build_m1(ex1, [Scenario()]))
    assert max(len(line) for line in text.splitlines()) < 120


def test_solution_parsing(ex1):
    model = build_m1(ex1, [Scenario()])
    sol = solve_highs(model)
    again = read_solution(write_solution(sol), model)
    assert again.rounded == sol.rounded and again.status == "optimal"
    with pytest.raises(SolutionParseError, match="line 3"):
        read_solution("#status optimal\nx1 1\nx2 one\n", model)
    with pytest.raises(SolutionParseError, match="status"):
        read_solution("x1 1\n")
    with pytest.raises(SolutionParseError, match="unknown variable"):
        read_solution("#status optimal\nbogus 1\n", model)
    with pytest.raises(SolutionParseError, match="misses binaries"):
        read_solution("#status optimal\nx1 1\n", model)
    text = write_solution(ExternalSolution(3.0, sol.values, "optimal"))
    with pytest.raises(SolutionParseError, match="inconsistent"):
        read_solution(text, model)


def test_bridge_through_subprocess(ex1):
    sol = run_external(build_m1(ex1, full_scenario_pool(ex1)), BRIDGE)
    assert sol.rounded == 25


def test_external_failures(ex1, tmp_path, monkeypatch):
    model = build_m1(ex1, [Scenario()])
    monkeypatch.delenv("RRSELECT_SOLVER", raising=False)
    with pytest.raises(ExternalSolverError, match="configured"):
        run_external(model)
    with pytest.raises(ExternalSolverError, match="exited"):
        run_external(model, f"{sys.executable} -c 'import sys; sys.exit(4)' {{model}} {{solution}}")
    with pytest.raises(ExternalSolverError, match="no solution"):
        run_external(model, f"{sys.executable} -c 'pass' {{model}} {{solution}}")
    script = tmp_path / "infeasible.py"
    script.write_text("import sys\nopen(sys.argv[2], 'w').write('#status infeasible\\n')\n")
    with pytest.raises(ExternalSolverError, match="infeasible"):
        run_external(model, f"{sys.executable} {script} {{model}} {{solution}}")


def _oracle_instances(count):
    out, seed = [], 0
    while len(out) < count:
        inst = random_small(10_000 + seed, n_max=7, K_max=3, gamma_max=2, cost_max=10)
        seed += 1
        if len(full_scenario_pool(inst)) <= 40 and len(full_candidate_pool(inst, None)) <= 3000:
            out.append(inst)
    return out


@pytest.mark.parametrize("inst", _oracle_instances(20), ids=lambda i: i.digest()[:8])
def test_formulations_match_brute_force(inst):
    exact = rec_brute(inst)[0]
    assert solve_highs(build_m1(inst, full_scenario_pool(inst))).rounded == exact
    assert solve_highs(build_m2(inst, solve_m2(inst, shortcut=False)[2].pool)).rounded == exact
    assert solve_highs(build_m3(inst)).rounded == exact


@pytest.mark.skipif(not os.environ.get("RRSELECT_SOLVER"), reason="no external solver configured")
@pytest.mark.parametrize("inst", _oracle_instances(5), ids=lambda i: i.digest()[:8])
def test_configured_external_solver(inst):
    exact = rec_brute(inst)[0]
    assert run_external(build_m1(inst, solve_m1(inst)[2].pool)).rounded == exact
    assert run_external(build_m3(inst)).rounded == exact
