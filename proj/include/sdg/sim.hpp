#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdg/grid.hpp"
#include "sdg/problem.hpp"
#include "sdg/report.hpp"

namespace sdg {

/// How a mixed strategy is realized along a path: draw a pure control each
/// step, or average drift/payoff under the mixture (both are affine in each
/// player's relaxed control, so the two agree in expectation).
enum class StrategyMode { sample_pure, mean_drift };

struct SimConfig {
    double dt_sim = 1e-3;
    double horizon = 10.0;
    long n_paths = 1000;
    double burn_in = 0.1;  // fraction of the horizon discarded
    std::uint64_t seed = 0;
    StrategyMode mode = StrategyMode::sample_pure;
    int n_batches = 30;

    void validate() const;
};

struct PayoffEstimate {
    double mean = 0.0;
    double half_width = 0.0;  // 95% batch-means confidence half-width
    long n_effective = 0;
};

struct BiasEstimate {
    PayoffEstimate estimate;
    long n_failed = 0;  // paths that never hit the small ball within the horizon
    double fail_fraction = 0.0;
    bool flagged = false;  // fail_fraction > 1%
};

/// Ensemble aggregates: time-average payoff estimate, state-moment traces at
/// checkpoint times, and boundary-exit statistics.
struct PathEnsembleSummary {
    long n_paths = 0;
    double horizon = 0.0;
    double dt = 0.0;
    PayoffEstimate avg_payoff;
    long reflections = 0;  // steps clamped back to the box

    std::vector<double> trace_time;
    std::vector<double> trace_mean_x0;       // E[X_0(t)]
    std::vector<double> trace_mean_norm2;    // E[|X(t)|^2]
    std::vector<double> trace_mean_lyap;     // E[V(X(t))] if a certificate exists, else 0
    std::vector<double> trace_lyap_half_width;  // batch-means CI half-width per checkpoint
    std::vector<double> trace_running_avg;   // (1/t) E[int_0^t h]
};

/// Euler-Maruyama ensemble under interpolated strategy fields. Path p draws
/// from an independent substream derived from (seed, p); results are
/// deterministic for a fixed configuration.
PathEnsembleSummary simulate_paths(const GameProblem& problem, const StrategyField& strategies,
                                   const SimConfig& config, const Vec& x0);

/// Long-run average of the payoff after burn-in; batch-means CI over paths.
PayoffEstimate estimate_beta(const GameProblem& problem, const StrategyField& strategies,
                             const SimConfig& config, const Vec& x0);

/// Monte Carlo bias estimate: E_x[int_0^tau (h - beta) dt] with tau the first
/// entry into the ball of radius r_small, detected at step resolution
/// (O(sqrt(dt)) hitting bias). Paths that never hit are truncated at the
/// horizon, counted, and flag the estimate past 1%.
BiasEstimate estimate_bias(const GameProblem& problem, const StrategyField& strategies,
                           const SimConfig& config, const Vec& x0, double beta, double r_small);

/// Checks the geometric moment bound E[V(X(t))] <= k0/(2 k1) + V(x0) e^{-2 k1 t}
/// at checkpoint times; pass iff estimate minus CI stays under the bound.
DiagnosticReport check_drift_bound(const GameProblem& problem, const StrategyField& strategies,
                                   const SimConfig& config, const Vec& x0);

/// CSV: time, mean state, mean squared norm, mean Lyapunov value, running average.
void write_trace_csv(const PathEnsembleSummary& summary, const std::string& path);

/// JSON report of named estimates (mean, half_width, n_effective each).
void write_estimates_json(const std::vector<std::pair<std::string, PayoffEstimate>>& estimates,
                          const std::string& problem_name, const std::string& path);

}  // namespace sdg
