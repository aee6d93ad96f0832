import numpy as np
import pytest

from flexinvest.errors import DimensionMismatch, NotOptimal
from flexinvest.formulation.problem import make_problem
from flexinvest.solver.simplex import Solution, Status, solve
from flexinvest.solver.verify import check_feasibility, dual_objective, duality_gap
from flexinvest.synthetic import desk_study
from flexinvest.io.study import study_from_config
from flexinvest.io.config import StudyConfig
from flexinvest.formulation.model import formulate

SQUARE = make_problem([1.0, 1.0], [[1, 1], [1, -1]], "LE", [2.0, 0.0], ub=[1.5, 1.5],
                      row_names=["sum", "diff"])


def test_corner_point_has_zero_residual():
    rep = check_feasibility(SQUARE, [1.0, 1.0])
    assert rep.feasible and rep.max_residual == 0.0
    assert rep.by_sense == {"L": 0.0, "E": 0.0, "G": 0.0}


def test_violation_names_row():
    rep = check_feasibility(SQUARE, [1.25, 0.75])
    assert not rep.feasible
    assert rep.violated_rows == [("diff", 0.5)]
    assert rep.max_residual == 0.5 and "diff" in str(rep)


def test_bound_violation_reported():
    rep = check_feasibility(SQUARE, [-0.5, -0.5])
    assert [n for n, _ in rep.bound_violations] == ["x0", "x1"]


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        check_feasibility(SQUARE, [1.0])


def test_one_variable_gap_zero():
    prob = make_problem([2.0], [[1.0]], "G", [3.0])
    sol = solve(prob)
    assert dual_objective(prob, sol.duals) == pytest.approx(6.0)
    assert duality_gap(prob, sol) == 0.0


def test_degenerate_lp_gap():
    # three constraints meet at the optimum (1, 1)
    prob = make_problem([-1.0, -1.0], [[1, 0], [0, 1], [1, 1]], "LLL", [1.0, 1.0, 2.0])
    sol = solve(prob)
    assert sol.objective == pytest.approx(-2.0)
    assert duality_gap(prob, sol) <= 1e-12


def test_desk_instance_gap():
    cfg, series = desk_study(4)
    study = study_from_config(StudyConfig.model_validate(cfg), series)
    model = formulate(study.model_input())
    sol = solve(model.problem)
    assert duality_gap(model.problem, sol) <= 1e-6


def test_gap_requires_optimal():
    sol = Solution(Status.INFEASIBLE, float("nan"), np.full(2, np.nan), np.zeros(2), np.zeros(2))
    with pytest.raises(NotOptimal):
        duality_gap(SQUARE, sol)
