import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdpgmap.dual_solver import (
    SolverOptions,
    dual_gradient,
    dual_objective,
    maxcut_mode_check,
    solve_dual,
)
from rdpgmap.errors import ConfigError, InputError
from rdpgmap.graphs import Graph
from rdpgmap.symmat import symmetrize

from conftest import random_graph


def test_options_validate():
    with pytest.raises(ConfigError):
        SolverOptions(trace_penalty=0.0)
    with pytest.raises(ConfigError):
        SolverOptions(trace_penalty=2.0, tol=-1.0)
    with pytest.raises(ConfigError):
        SolverOptions(trace_penalty=2.0, max_iter=0)


def test_objective_zero_at_center(triangle):
    for c in (0.5, 1.0, 7.0):
        assert dual_objective(c * np.eye(3), triangle) == 0.0


def test_objective_branch_values(edge_graph):
    # both ordered copies of the single pair contribute
    q = np.array([[4.0, -2.0], [-2.0, 4.0]])
    assert dual_objective(q, edge_graph) == pytest.approx(
        2.0 * (-1.0 - math.log(2.0)), abs=1e-12
    )
    q2 = np.array([[4.0, -0.5], [-0.5, 4.0]])
    assert dual_objective(q2, edge_graph) == pytest.approx(-1.0, abs=1e-12)
    g_empty = Graph(2, [])
    assert dual_objective(q2, g_empty) == 0.0
    q3 = np.array([[4.0, 3.0], [3.0, 4.0]])
    assert dual_objective(q3, g_empty) == pytest.approx(
        2.0 * (3.0 - math.log(3.0) - 1.0), abs=1e-12
    )


@given(st.integers(0, 10**6))
def test_gradient_matches_central_differences(seed):
    rng = np.random.default_rng(seed)
    n = 5
    g = random_graph(n, 0.5, seed)
    q = symmetrize(rng.uniform(-3.0, 3.0, size=(n, n)))
    # keep entries away from the breakpoints where curvature jumps
    q[np.abs(q + 1.0) < 0.1] += 0.2
    q[np.abs(q - 1.0) < 0.1] += 0.2
    q = symmetrize(q)
    grad = dual_gradient(q, g)
    h = 1e-6
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n))
            e[i, j] = e[j, i] = h
            fd = (dual_objective(q + e, g) - dual_objective(q - e, g)) / (
                2 * h
            )
            # symmetric perturbation moves both ordered copies
            assert abs(grad[i, j] * 2 - fd) < 1e-5 * max(1.0, abs(fd))


def test_gradient_diagonal_is_zero(triangle):
    q = symmetrize(np.random.default_rng(0).uniform(-2, 2, (3, 3)))
    assert np.all(np.diag(dual_gradient(q, triangle)) == 0.0)


def test_single_edge_fixture(edge_graph):
    sol = solve_dual(edge_graph, SolverOptions(trace_penalty=4.0))
    assert sol.converged
    assert sol.objective == pytest.approx(2.0 * (-1.0 - math.log(4.0)),
                                          abs=1e-9)
    assert sol.matrix[0, 1] == pytest.approx(-4.0, abs=1e-6)
    assert np.allclose(np.diag(sol.matrix), 4.0)


def test_triangle_penalty_one(triangle):
    sol = solve_dual(triangle, SolverOptions(trace_penalty=1.0))
    assert sol.converged
    assert sol.objective == pytest.approx(-3.0, abs=1e-9)
    # cone-active vertex: the smallest eigenvalue 1 + 2q hits zero at -1/2
    off = ~np.eye(3, dtype=bool)
    assert np.max(np.abs(sol.matrix[off] + 0.5)) < 1e-6


def test_empty_graph_stays_centered():
    g = Graph(4, [])
    sol = solve_dual(g, SolverOptions(trace_penalty=3.0))
    assert sol.converged
    assert sol.objective == 0.0
    assert np.max(np.abs(sol.matrix - 3.0 * np.eye(4))) < 1e-8


def test_matching_fixture():
    g = Graph(6, [(0, 1), (2, 3), (4, 5)])
    c = 5.0
    sol = solve_dual(g, SolverOptions(trace_penalty=c))
    assert sol.converged
    assert sol.objective == pytest.approx(6.0 * (-1.0 - math.log(c)),
                                          abs=1e-8)


def test_solution_feasibility(rng):
    g = random_graph(12, 0.4, 77)
    sol = solve_dual(g, SolverOptions(trace_penalty=6.0))
    assert sol.converged
    assert np.allclose(np.diag(sol.matrix), 6.0)
    w = np.linalg.eigvalsh(sol.matrix)
    assert w.min() > -1e-7 * max(1.0, w.max())
    assert sol.grad_map_norm <= 1e-5 * max(1.0, np.linalg.norm(sol.matrix))


def test_monotone_objective_vs_center(rng):
    # the solver must do at least as well as its starting point
    for seed in (1, 2, 3):
        g = random_graph(9, 0.5, seed)
        sol = solve_dual(g, SolverOptions(trace_penalty=3.0))
        assert sol.objective <= 1e-12


def test_maxcut_mode_check(edge_graph):
    low = solve_dual(edge_graph, SolverOptions(trace_penalty=0.5))
    high = solve_dual(edge_graph, SolverOptions(trace_penalty=4.0))
    assert maxcut_mode_check(low, edge_graph)
    assert not maxcut_mode_check(high, edge_graph)


def test_input_validation(triangle):
    with pytest.raises(InputError):
        dual_objective(np.zeros((2, 2)), triangle)
    with pytest.raises(InputError):
        solve_dual("nope", SolverOptions(trace_penalty=1.0))
