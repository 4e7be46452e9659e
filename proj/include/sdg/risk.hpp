#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sdg/ergodic.hpp"
#include "sdg/grid.hpp"
#include "sdg/problem.hpp"
#include "sdg/report.hpp"

namespace sdg {

using RiskDriftFn = std::function<Vec(const Vec&, const Control&)>;
using RiskPayoffFn = std::function<double(const Vec&, const Control&)>;

/// Risk-sensitive control instance: single minimizing player, criterion is the
/// long-run exponential growth rate of exp(integral of h).
struct RiskProblem {
    int dim = 1;
    RiskDriftFn drift;
    SigmaFn sigma;
    RiskPayoffFn payoff;
    ControlSet u;
    FlatnessCertificate flatness;
    // Parameters of the Lyapunov shape (x^T Q x)^(1+alpha) / (eps + (x^T Q x)^(1/2)).
    double lyap_eps = 1.0;
    double lyap_alpha = 0.5;
    std::string name;

    void validate() const;
    Mat diffusion(const Vec& x) const { return mat_mul_T(sigma(x), dim); }
    /// View as a one-player GameProblem (player 2 is a dummy singleton, and the
    /// roles are flipped so the single player minimizes).
    GameProblem as_game() const;
};

/// Closed ball the adversary of the transformed game can be restricted to.
struct AdversaryBall {
    double radius = 0.0;  // R_w
    double K = 0.0;       // smallest positive root of the certificate quadratic
    // Quadratic coefficients, kept for the report.
    double quad_a = 0.0;
    double quad_b = 0.0;
    double quad_c = 0.0;

    double root_residual() const { return quad_a * K * K - quad_b * K + quad_c; }
};

/// Computes K (smallest positive root; linear fallback when the quadratic
/// coefficient vanishes) and the ball radius from the flatness certificate.
AdversaryBall compute_adversary_ball(const FlatnessCertificate& cert);

struct RiskHamiltonianValue {
    double value = 0.0;
    int control_index = 0;  // minimizing control
    Vec w{};                // maximizing adversary drift
};

/// min over v of the analytic max over the ball of
///   (b(x,v)+w) . grad f + (1/2) tr(a D2 f) + h(x,v) - (1/2) w^T a^{-1} w.
/// The unconstrained inner maximizer is w = a(x) p (p the upwinded gradient),
/// radially clipped to the ball; upwind directions follow the combined drift,
/// resolved by at most 3 re-upwind passes and then frozen.
RiskHamiltonianValue risk_hamiltonian(const Grid& grid, const ValueField& f, int node,
                                      const RiskProblem& problem, const AdversaryBall& ball);

/// CFL-stable step bound for the transformed game: the adversary can push the
/// drift by up to ball_radius in norm, so the bound inflates every drift term.
double risk_cfl_dt(const RiskProblem& problem, const Grid& grid, double ball_radius);

/// Log-domain relative value iteration for the transformed game; returns the
/// risk-sensitive value beta, the bias with phi*(0) = 0, and the minimizing
/// control selector.
ErgodicSolution solve_risk_game(const RiskProblem& problem, const Grid& grid, double dt,
                                double t_end, const ValueField& phi0,
                                const SolveOptions& opts = {});

/// Multiplicative relative value iteration
///   d(psi)/dt = min_v [L psi + (h - ln psi(t,0)) psi],
/// marched explicitly; psi must stay positive. Converges to e^beta psi* with
/// psi*(0) = 1.
std::pair<ValueField, SolveReport> rvi_multiplicative(const RiskProblem& problem, const Grid& grid,
                                                      double dt, double t_end,
                                                      const ValueField& psi0,
                                                      const SolveOptions& opts = {});

}  // namespace sdg
