#pragma once

#include "sdg/grid.hpp"
#include "sdg/problem.hpp"

namespace sdg {

/// Solution of a zero-sum matrix game over mixed strategies. Row player
/// maximizes, column player minimizes.
struct GameSolution {
    double value = 0.0;
    MixedStrategy v1;  // maximizer
    MixedStrategy v2;  // minimizer
    double gap = 0.0;  // residual duality gap, >= 0
};

/// Exact game value and optimal mixed strategies by linear programming
/// (self-contained dense simplex, Bland's rule, so ties resolve
/// deterministically). A pure saddle point short-circuits the LP.
GameSolution solve_matrix_game(const Matrix& G);

/// Brown-Robinson fictitious play; test oracle independent of the LP path.
/// The value estimate is the midpoint of the best-response bounds of the
/// empirical mixtures.
GameSolution fictitious_play(const Matrix& G, long iters);

}  // namespace sdg
