"""Solver unit tests: frozen instances, validation, and a randomized sweep."""

import numpy as np
import pytest

from chebdea import linprog
from chebdea.errors import NumericalError
from oracles import random_bounded_lp, vertex_optimum


def _problem(objective, rows, senses, rhs, **kwargs):
    return linprog.LpProblem(
        objective=np.asarray(objective, dtype=float),
        constraints=np.asarray(rows, dtype=float).reshape(len(rhs), len(objective)),
        senses=tuple(senses),
        rhs=np.asarray(rhs, dtype=float),
        **kwargs,
    )


def test_two_variable_optimum():
    problem = _problem([3.0, 2.0], [[1.0, 1.0], [1.0, 0.0]], ["<=", "<="], [4.0, 2.0])
    solution = linprog.solve(problem)
    assert solution.is_optimal
    assert solution.objective == pytest.approx(10.0, abs=1e-12)
    np.testing.assert_allclose(solution.x, [2.0, 2.0], atol=1e-12)
    assert linprog.max_constraint_violation(problem, solution.x) <= 1e-12


def test_contradictory_rows_are_infeasible():
    problem = _problem([1.0], [[1.0], [1.0]], ["<=", ">="], [1.0, 2.0])
    solution = linprog.solve(problem)
    assert solution.status is linprog.LpStatus.INFEASIBLE
    assert solution.objective is None
    assert solution.x is None


def test_no_rows_is_unbounded():
    problem = _problem([1.0], np.zeros((0, 1)), [], [])
    solution = linprog.solve(problem)
    assert solution.status is linprog.LpStatus.UNBOUNDED
    assert not solution.is_optimal


def test_equality_row():
    problem = _problem([1.0, 1.0], [[1.0, 1.0], [1.0, 0.0]], ["=", "<="], [3.0, 2.0])
    solution = linprog.solve(problem)
    assert solution.is_optimal
    assert solution.objective == pytest.approx(3.0, abs=1e-12)
    assert solution.x.sum() == pytest.approx(3.0, abs=1e-12)


def test_negative_lower_bound():
    problem = _problem([-1.0], np.zeros((0, 1)), [], [], lower_bounds=-2.0)
    solution = linprog.solve(problem)
    assert solution.is_optimal
    assert solution.objective == pytest.approx(2.0, abs=1e-12)
    assert solution.x[0] == pytest.approx(-2.0, abs=1e-12)


def test_finite_upper_bound_caps_the_optimum():
    problem = _problem([1.0, 0.5], np.zeros((0, 2)), [], [], upper_bounds=[5.0, 1.0])
    solution = linprog.solve(problem)
    assert solution.is_optimal
    assert solution.objective == pytest.approx(5.5, abs=1e-12)


def test_degenerate_cycling_instance_terminates():
    # Beale's classic cycling instance (as a maximization); the stall
    # detector must hand over to Bland's rule and still reach 1/20.
    problem = _problem(
        [0.75, -150.0, 0.02, -6.0],
        [
            [0.25, -60.0, -1.0 / 25.0, 9.0],
            [0.5, -90.0, -1.0 / 50.0, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ],
        ["<=", "<=", "<="],
        [0.0, 0.0, 1.0],
    )
    solution = linprog.solve(problem)
    assert solution.is_optimal
    assert solution.objective == pytest.approx(0.05, abs=1e-9)


def test_iteration_budget_exhaustion_raises():
    # Two independent improving variables force at least two pivots.
    problem = _problem([1.0, 1.0], [[1.0, 0.0], [0.0, 1.0]], ["<=", "<="], [1.0, 1.0])
    assert linprog.solve(problem).objective == pytest.approx(2.0)
    with pytest.raises(NumericalError):
        linprog.solve(problem, max_iterations=1)


def test_problem_validation():
    with pytest.raises(ValueError):
        _problem([1.0, 2.0], [[1.0, 1.0]], ["<="], [1.0, 2.0])
    with pytest.raises(ValueError):
        _problem([1.0], [[1.0]], ["<"], [1.0])
    with pytest.raises(ValueError):
        _problem([np.nan], [[1.0]], ["<="], [1.0])
    with pytest.raises(ValueError):
        _problem([1.0], [[1.0]], ["<="], [np.inf])
    with pytest.raises(ValueError):
        _problem([1.0], [[1.0]], ["<="], [1.0], lower_bounds=2.0, upper_bounds=1.0)
    with pytest.raises(ValueError):
        _problem([1.0], [[1.0]], ["<="], [1.0], lower_bounds=-np.inf)
    with pytest.raises(ValueError):
        _problem([1.0, 2.0], [[1.0, 1.0]], ["<=", "<="], [1.0])


def test_problem_arrays_are_read_only():
    problem = _problem([1.0], [[1.0]], ["<="], [1.0])
    with pytest.raises(ValueError):
        problem.objective[0] = 2.0


def test_max_constraint_violation_measures_the_worst_row():
    problem = _problem(
        [0.0, 0.0], [[1.0, 1.0], [1.0, 0.0]], ["<=", ">="], [4.0, 1.0], upper_bounds=[3.0, 3.0]
    )
    assert linprog.max_constraint_violation(problem, [2.0, 1.0]) == 0.0
    assert linprog.max_constraint_violation(problem, [3.0, 2.0]) == pytest.approx(1.0)
    assert linprog.max_constraint_violation(problem, [0.5, 0.0]) == pytest.approx(0.5)
    assert linprog.max_constraint_violation(problem, [-1.0, 0.0]) == pytest.approx(2.0)
    assert linprog.max_constraint_violation(problem, [1.0, 4.0]) == pytest.approx(1.0)


def test_randomized_sweep_against_vertex_enumeration():
    # 300 random box-bounded problems; statuses must match the construction
    # and optima must match exhaustive vertex enumeration.
    rng = np.random.default_rng(1729)
    n_feasible = 0
    for _ in range(300):
        problem, expected_feasible = random_bounded_lp(rng)
        solution = linprog.solve(problem)
        status, best = vertex_optimum(problem)
        if expected_feasible:
            assert status == "optimal"
            assert solution.is_optimal
            assert solution.objective == pytest.approx(best, abs=1e-8)
            assert linprog.max_constraint_violation(problem, solution.x) <= 1e-8
            n_feasible += 1
        else:
            assert status == "infeasible"
            assert solution.status is linprog.LpStatus.INFEASIBLE
    assert n_feasible >= 150
