"""Smoke tests for the Python bindings (fast, desk-scale settings)."""

import math

import pytest

import sdgames


def test_list_problems():
    names = sdgames.list_problems()
    assert "ou1d" in names
    assert "ou-game-1d" in names
    assert "risk-ou-1d" in names
    assert sdgames.is_risk_problem("risk-ou-1d")
    assert not sdgames.is_risk_problem("ou1d")


def test_grid_layout():
    g = sdgames.Grid(1, 4.0, 41)
    assert g.num_nodes() == 41
    coords = g.coords()
    assert coords[0] == -4.0
    assert coords[20] == 0.0
    assert math.isclose(g.spacing, 0.2)
    with pytest.raises(ValueError):
        sdgames.Grid(1, 4.0, 40)  # even node count has no origin node


def test_solve_rvi_ou_benchmark():
    g = sdgames.Grid(1, 6.0, 121)
    sol = sdgames.solve_rvi("ou1d", g, t_end=20.0)
    assert abs(sol["beta"] - 1.0) < 0.05
    phi = sol["phi_star"]
    assert phi[g.num_nodes() // 2] == 0.0  # normalized at the origin
    # phi ~ x^2/2 at x = 1
    idx = g.num_nodes() // 2 + 10
    assert abs(phi[idx] - 0.5) < 0.1


def test_matrix_game():
    s = sdgames.solve_matrix_game([[3.0, 1.0], [0.0, 2.0]])
    assert abs(s["value"] - 1.5) < 1e-9
    assert s["gap"] <= 1e-9
    assert abs(s["v1"][0] - 0.5) < 1e-8


def test_solve_risk():
    g = sdgames.Grid(1, 3.0, 61)
    sol = sdgames.solve_risk("risk-ou-1d", g, t_end=20.0)
    assert abs(sol["beta"] - 0.25) < 0.05


def test_estimate_beta():
    g = sdgames.Grid(1, 5.0, 61)
    est = sdgames.estimate_beta("ou1d", g, x0=0.5, dt=5e-3, horizon=10.0,
                                n_paths=200, seed=7)
    assert abs(est["mean"] - 1.0) < max(4 * est["half_width"], 0.15)


def test_run_config_and_errors():
    result = sdgames.run_config(
        "problem = ou1d\nmethod = rvi\ngrid.radius = 4\ngrid.n = 41\nsolver.t_end = 5\n"
    )
    assert result["exit_code"] == 0
    assert abs(result["beta"] - 1.0) < 0.2
    with pytest.raises(ValueError):
        sdgames.run_config("problem = nope\nmethod = rvi\n")
