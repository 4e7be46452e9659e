#pragma once

#include <vector>

#include "sdg/grid.hpp"
#include "sdg/matrix_game.hpp"
#include "sdg/report.hpp"

namespace sdg {

struct SolveOptions {
    double policy_tol = 1e-7;       // scaled by alpha for the discounted stop rule
    int max_policy_sweeps = 200;
    double linear_tol = 1e-10;      // Gauss-Seidel residual target (2D)
    int max_linear_sweeps = 200000;
    double residual_tol = 0.1;      // elliptic residual bound on the core region
    double beta_avg_fraction = 0.1; // final fraction of the horizon averaged for beta
    int record_stride = 1;          // residual history subsampling for long marches
};

/// Discounted Isaacs solve on a Dirichlet-zero grid by policy iteration:
/// per-node matrix games fixing psi, then the linear equation of the induced
/// chain fixing both strategies.
std::pair<ValueField, StrategyField> solve_discounted(const GameProblem& problem, const Grid& grid,
                                                      double alpha, const SolveOptions& opts = {},
                                                      SolveReport* report = nullptr,
                                                      const ValueField* warm_start = nullptr);

/// Vanishing-discount extraction of (beta, phi_star): beta_hat(alpha) =
/// alpha * psi_alpha(0), phi_hat = psi_alpha - psi_alpha(0), last iterate
/// returned with the trend table in the report.
ErgodicSolution vanishing_discount(const GameProblem& problem, const Grid& grid,
                                   const std::vector<double>& alphas,
                                   const SolveOptions& opts = {});

/// Explicit value-iteration march: d(phi)/dt = minmax[L phi + h] - beta.
std::pair<ValueField, SolveReport> vi_march(const GameProblem& problem, const Grid& grid,
                                            const ValueField& phi0, double beta, double dt,
                                            double t_end, const SolveOptions& opts = {});

/// Explicit relative value iteration: d(phi)/dt = minmax[L phi + h] - phi(t,0),
/// the offset read at the start of each step. phi(t,0) is the running beta
/// estimate; on convergence phi -> phi_star + beta.
std::pair<ValueField, SolveReport> rvi_march(const GameProblem& problem, const Grid& grid,
                                             const ValueField& phi0, double dt, double t_end,
                                             const SolveOptions& opts = {});

/// RVI packaged as an ErgodicSolution (beta from the tail average of the
/// origin trace, bias renormalized to vanish at the origin, selectors
/// extracted at the limit).
ErgodicSolution solve_rvi(const GameProblem& problem, const Grid& grid, double dt, double t_end,
                          const SolveOptions& opts = {});

/// Couples one VI and one RVI march from the same initial data and verifies
/// the two exact identities linking them (difference-of-offsets equality and
/// the exponential-average formula, integral by trapezoid on the origin trace).
DiagnosticReport check_lemma33(const GameProblem& problem, const Grid& grid,
                               const ValueField& phi0, double beta, double dt, double t_end,
                               const SolveOptions& opts = {});

/// Per-node matrix-game argmaxes of the Hamiltonian assembled on phi.
StrategyField extract_selectors(const GameProblem& problem, const Grid& grid,
                                const ValueField& phi);

/// Verifies the geometric-ergodicity contraction bound
///   |phibar(t,x) - phi*(x)| <= ||phibar(s,.) - phi*||_V (k0/(2 k1) + V(x) e^{-2 k1 (t-s)})
/// at all checkpoint pairs s < t over core nodes.
DiagnosticReport check_contraction(const GameProblem& problem, const Grid& grid,
                                   const ValueField& phi0, const ValueField& phi_star,
                                   double beta, double dt,
                                   const std::vector<double>& checkpoints,
                                   const SolveOptions& opts = {});

/// Sup over core nodes of |game-value(H(phi - phi(0))) - beta|; the residual
/// of the ergodic Isaacs equation at a candidate solution.
double elliptic_residual(const GameProblem& problem, const Grid& grid, const ValueField& phi,
                         double beta);

}  // namespace sdg
