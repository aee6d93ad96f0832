import math

import numpy as np
import pytest

from conftest import rel
from flexinvest.errors import NumericalBreakdown
from flexinvest.formulation.problem import make_problem
from flexinvest.solver.kernels import BACKENDS
from flexinvest.solver.simplex import SolveOptions, Status, geometric_scaling, solve
from flexinvest.solver.verify import check_feasibility, duality_gap
from oracles import random_feasible_lp, tableau_simplex

INF = math.inf


def lp(c, A, sense, rhs, lb=None, ub=None, **kw):
    return make_problem(c, np.atleast_2d(A), sense, rhs, lb, ub, **kw)


def test_min_x_at_lower_row():
    sol = solve(lp([1.0], [[1.0]], "G", [3.0]))
    assert sol.status is Status.OPTIMAL
    assert sol.x[0] == pytest.approx(3.0) and sol.objective == pytest.approx(3.0)
    assert sol.duals[0] == pytest.approx(1.0)


def test_max_x_at_upper_row():
    sol = solve(lp([-1.0], [[1.0]], "L", [5.0]))
    assert sol.objective == pytest.approx(-5.0)


def test_infeasible_names_rows():
    prob = lp([1.0], [[1.0], [1.0]], "GL", [3.0, 2.0], row_names=["low", "high"])
    sol = solve(prob)
    assert sol.status is Status.INFEASIBLE
    assert set(sol.infeasible_rows) & {"low", "high"}


def test_crossed_bounds_infeasible():
    assert solve(lp([1.0], [[1.0]], "L", [5.0], lb=[2.0], ub=[1.0])).status is Status.INFEASIBLE


def test_unbounded():
    assert solve(lp([-1.0, 0.0], [[1.0, -1.0]], "L", [1.0])).status is Status.UNBOUNDED


def test_free_variables_and_equalities():
    # min x + y  s.t. x - y = 1, x + 2y >= 4, both free
    sol = solve(lp([1.0, 1.0], [[1, -1], [1, 2]], "EG", [1.0, 4.0], lb=[-INF, -INF]))
    assert sol.x == pytest.approx([2.0, 1.0])


def test_iteration_limit():
    rng = np.random.default_rng(0)
    c, A, s, b, lo, hi = random_feasible_lp(rng, 20, 30)
    sol = solve(make_problem(c, A, s, b, lo, hi), SolveOptions(max_iter=1))
    assert sol.status is Status.ITERATION_LIMIT


def test_nan_data_rejected():
    with pytest.raises(NumericalBreakdown):
        solve(lp([1.0], [[1.0]], "G", [3.0], ub=[math.nan]))


def test_cycling_example_terminates():
    # Beale's example cycles under textbook Dantzig pricing
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    sol = solve(lp(c, A, "LLL", [0, 0, 1]))
    assert sol.objective == pytest.approx(-0.05)


@pytest.mark.parametrize("seed", range(15))
def test_random_lps_match_reference(seed):
    rng = np.random.default_rng(1000 + seed)
    m, n = int(rng.integers(2, 15)), int(rng.integers(2, 20))
    c, A, s, b, lo, hi = random_feasible_lp(rng, m, n)
    prob = make_problem(c, A, s, b, lo, hi)
    ref = tableau_simplex(c, A, s, b, lo, hi)
    sol = solve(prob)
    assert ref.status == "optimal" and sol.optimal
    assert rel(sol.objective, ref.objective) <= 1e-8
    assert check_feasibility(prob, sol.x, 1e-7).feasible
    assert duality_gap(prob, sol) <= 1e-9


def test_deterministic_bytes():
    rng = np.random.default_rng(7)
    prob = make_problem(*random_feasible_lp(rng, 25, 40))
    assert solve(prob).to_bytes() == solve(prob).to_bytes()


@pytest.mark.parametrize("lam", [0.125, 3.0, 1000.0])
def test_cost_scaling_keeps_basis(lam):
    rng = np.random.default_rng(11)
    prob = make_problem(*random_feasible_lp(rng, 20, 30))
    a = solve(prob)
    b = solve(prob.with_objective(prob.c * lam))
    assert a.basis == b.basis
    assert b.objective == pytest.approx(lam * a.objective, rel=1e-9)


def test_scaling_factors_ignore_costs():
    rng = np.random.default_rng(2)
    prob = make_problem(*random_feasible_lp(rng, 10, 12))
    R, S = geometric_scaling(prob.A)
    assert np.all(np.log2(R) == np.round(np.log2(R))) and np.all(np.log2(S) == np.round(np.log2(S)))


def test_weak_duality_along_the_path():
    rng = np.random.default_rng(21)
    c, A, s, b, lo, hi = random_feasible_lp(rng, 20, 30)
    prob = make_problem(c, A, s, b, lo, hi)
    seen = []
    sol = solve(prob, SolveOptions(callback=seen.append))
    assert sol.optimal and seen
    scale = max(1.0, abs(sol.objective))
    for rec in seen:
        assert rec["dual"] <= sol.objective + 1e-9 * scale
        assert rec["primal"] >= sol.objective - 1e-9 * scale
        assert rec["dual"] <= rec["primal"] + 1e-9 * scale


@pytest.mark.skipif("compiled" not in BACKENDS, reason="compiled kernels not built")
def test_backends_agree_on_toy(toy_study):
    from flexinvest.formulation.model import formulate
    prob = formulate(toy_study.model_input()).problem
    a = solve(prob, SolveOptions(backend="compiled"))
    b = solve(prob, SolveOptions(backend="python"))
    assert a.backend == "compiled" and b.backend == "python"
    # reductions may round differently, so ties can break another way; the optimum must agree
    assert rel(a.objective, b.objective) <= 1e-9


def test_unconstrained_problem():
    sol = solve(make_problem([1.0, -2.0, 0.0], np.zeros((0, 3)), "", [], lb=[0, -1, 0], ub=[1, 4, 2]))
    assert sol.x.tolist() == [0.0, 4.0, 0.0] and sol.alternative_optima
    assert solve(make_problem([-1.0], np.zeros((0, 1)), "", [])).status is Status.UNBOUNDED


def test_toy_solution_is_verified(toy_solved):
    model, sol = toy_solved
    assert sol.optimal
    assert check_feasibility(model.problem, sol.x, 1e-9).feasible
    assert duality_gap(model.problem, sol) <= 1e-9
