import math

import numpy as np
import pytest

from burgers_ilt.engine import (
    GridMismatchError, SolutionTable, SpaceTimeGrid, error_norms, solve,
    table_from_function)
from burgers_ilt.ilt import Status
from burgers_ilt.problem import BurgersProblem
from burgers_ilt.reference import Example1Params, example1_exact, example1_problem

GRID = SpaceTimeGrid(np.linspace(0, 1, 11), [0.1, 0.5, 1.0])


def constant(c):
    return lambda x: np.full(np.shape(x), c, dtype=float)


def test_example1_point():
    table = solve(example1_problem(1.0, 2.0), SpaceTimeGrid([0.5], [0.5]))
    expected = math.pi * math.exp(-math.pi ** 2 / 2)
    assert abs(table.w[0, 0] - expected) < 1e-9
    assert abs(table.w[0, 0] - 0.0225940) < 1e-7


def test_example1_ends_vanish():
    table = solve(example1_problem(1.0, 2.0), GRID)
    assert np.all(table.w[:, [0, -1]] == 0)
    assert table.meta["boundary_deviation"] == 0
    assert table.degraded_count == 0


def test_zero_solution():
    table = solve(BurgersProblem(1.0, 0.0, 1.0, 0.0, 0.0, constant(0.0)), GRID)
    assert np.all(table.w == 0)
    assert np.all(table.status == Status.OK)


def test_constant_state_with_robin_growth():
    # w = 1 is a steady solution; its heat image grows like e^{t/4}
    prob = BurgersProblem(1.0, 0.0, 1.0, 1.0, 1.0, constant(1.0))
    table = solve(prob, GRID)
    assert np.max(np.abs(table.w - 1)) < 1e-8
    assert table.meta["boundary_deviation"] < 1e-6
    assert table.meta["config"]["gamma_shift"] == pytest.approx(0.25)


def test_nonzero_boundary_values():
    # traveling-front profile with w(0) = 1, w(1) = -1
    a_sq = 0.2
    w0 = lambda x: -np.tanh((np.asarray(x) - 0.5) / (2 * a_sq)) / math.tanh(0.5 / (2 * a_sq))
    prob = BurgersProblem(a_sq, 0.0, 1.0, 1.0, -1.0, w0)
    table = solve(prob, GRID)
    assert table.meta["boundary_deviation"] < 1e-6
    assert table.degraded_count == 0


def test_u00_independence():
    prob = example1_problem(0.1, 2.0)
    base = solve(prob, GRID, u00=1.0).w
    other = solve(prob, GRID, u00=7.0).w
    assert np.max(np.abs(base - other)) < 1e-10


def test_determinism():
    prob = example1_problem(1.0, 2.0)
    assert np.array_equal(solve(prob, GRID).w, solve(prob, GRID).w)


def test_threads_match_serial():
    prob = example1_problem(1.0, 2.0)
    grid = SpaceTimeGrid(np.linspace(0, 1, 101), [0.1, 0.5, 1.0])
    assert np.array_equal(solve(prob, grid, threads=1).w, solve(prob, grid, threads=4).w)
    assert np.array_equal(solve(prob, GRID, threads=1).w, solve(prob, GRID, threads=3).w)


def test_initial_row():
    grid = SpaceTimeGrid(np.linspace(0, 1, 5), [0.0, 0.2])
    params = Example1Params(1.0, 2.0)
    table = solve(example1_problem(1.0, 2.0), grid)
    assert np.allclose(table.w[0], example1_exact(grid.xs, 0.0, params), atol=1e-15)


def test_timings_recorded():
    meta = solve(example1_problem(1.0, 2.0), GRID).meta
    assert set(meta["timings"]) == {"hopf_cole", "field_build", "inversion", "total"}
    assert all(v >= 0 for v in meta["timings"].values())
    assert meta["solver"] == "ilt"


def test_grid_outside_domain():
    with pytest.raises(ValueError):
        solve(example1_problem(1.0, 2.0), SpaceTimeGrid([0.0, 1.5], [0.1]))


def test_grid_validation():
    with pytest.raises(ValueError):
        SpaceTimeGrid([0.0, 0.0], [0.1])
    with pytest.raises(ValueError):
        SpaceTimeGrid([0.0], [])
    g = SpaceTimeGrid.uniform(0, 1, 0.25, 1.0, 0.5)
    assert g.xs.tolist() == [0, 0.25, 0.5, 0.75, 1.0] and g.ts.tolist() == [0.5, 1.0]


def _table(value, n=11):
    grid = SpaceTimeGrid(np.linspace(0, 1, n), np.linspace(0, 1, n))
    return SolutionTable(grid, np.full((n, n), value), np.zeros((n, n), dtype=np.int8))


def test_norms_identical():
    res = error_norms(_table(0.3), _table(0.3))
    assert res["l2"] == 0 and res["linf"] == 0


def test_norms_constant_offset():
    res = error_norms(_table(0.1), _table(0.0))
    assert res["linf"] == pytest.approx(0.1)
    # sqrt(dx dt * 121 * 0.01) with dx = dt = 0.1
    assert res["l2"] == pytest.approx(math.sqrt(0.01 * 121 * 0.01))
    assert len(res["per_time"]) == 11


def test_norms_exclude_degraded():
    a, b = _table(0.1), _table(0.0)
    a.status[3, 4] = Status.DEGRADED
    a.w[3, 4] = 100.0
    res = error_norms(a, b)
    assert res["excluded"] == 1 and res["linf"] == pytest.approx(0.1)


def test_norms_grid_mismatch():
    with pytest.raises(GridMismatchError):
        error_norms(_table(0.0, 11), _table(0.0, 12))


def test_table_from_function():
    table = table_from_function(lambda x, t: x + 10 * t, GRID, "demo")
    assert table.w.shape == (3, 11)
    assert table.w[1, 2] == pytest.approx(0.2 + 5)
