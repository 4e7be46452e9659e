"""Numerical solvers for zero-sum ergodic stochastic differential games.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface.
"""

from ._core import (
    ConvergenceFailure,
    Grid,
    InvalidInputError,
    estimate_beta,
    is_risk_problem,
    list_problems,
    run_config,
    solve_matrix_game,
    solve_risk,
    solve_rvi,
    vanishing_discount,
)

__all__ = [
    "ConvergenceFailure",
    "Grid",
    "InvalidInputError",
    "estimate_beta",
    "is_risk_problem",
    "list_problems",
    "run_config",
    "solve_matrix_game",
    "solve_risk",
    "solve_rvi",
    "vanishing_discount",
]
