#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sdg/errors.hpp"
#include "sdg/registry.hpp"
#include "sdg/sim.hpp"

using namespace sdg;

namespace {

/// Point-mass strategy field on a grid for a control-free 1D problem.
StrategyField singleton_strategies(const Grid& g) {
    StrategyField s(g, 1, 1);
    return s;
}

SimConfig desk_config(std::uint64_t seed = 42) {
    SimConfig c;
    c.dt_sim = 5e-3;
    c.horizon = 20.0;
    c.n_paths = 400;
    c.burn_in = 0.25;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("zero-noise dynamics follow the deterministic flow") {
    // dX = -X dt, X(0) = 1: X(t) = e^{-t}; Euler error is O(dt) on [0, T].
    GameProblem p = testing::scalar_problem(testing::neg_x, 0.0, testing::x_squared);
    const Grid g(1, 4.0, 41, Boundary::one_sided);
    SimConfig c = desk_config();
    c.horizon = 2.0;
    c.n_paths = 8;
    const PathEnsembleSummary s = simulate_paths(p, singleton_strategies(g), c, Vec{1.0, 0.0});
    REQUIRE(!s.trace_time.empty());
    for (std::size_t i = 0; i < s.trace_time.size(); ++i) {
        const double t = s.trace_time[i];
        CHECK(std::abs(s.trace_mean_x0[i] - std::exp(-t)) < 3.0 * c.dt_sim * (1.0 + t));
    }
    // No randomness: the batch-means half-width collapses.
    CHECK(s.avg_payoff.half_width < 1e-12);
}

TEST_CASE("results are bitwise deterministic in the seed") {
    const GameProblem p = make_problem("ou1d");
    const Grid g(1, 4.0, 41, Boundary::one_sided);
    SimConfig c = desk_config(123);
    c.horizon = 2.0;
    c.n_paths = 50;
    const Vec x0{0.5, 0.0};
    const PathEnsembleSummary a = simulate_paths(p, singleton_strategies(g), c, x0);
    const PathEnsembleSummary b = simulate_paths(p, singleton_strategies(g), c, x0);
    CHECK(a.avg_payoff.mean == b.avg_payoff.mean);
    CHECK(a.avg_payoff.half_width == b.avg_payoff.half_width);
    CHECK(a.trace_mean_norm2 == b.trace_mean_norm2);

    SimConfig c2 = c;
    c2.seed = 124;
    const PathEnsembleSummary d = simulate_paths(p, singleton_strategies(g), c2, x0);
    CHECK(a.avg_payoff.mean != d.avg_payoff.mean);
}

TEST_CASE("OU stationary second moment is recovered") {
    // dX = -X dt + sqrt(2) dW has stationary variance 1.
    const GameProblem p = make_problem("ou1d");
    const Grid g(1, 6.0, 61, Boundary::one_sided);
    SimConfig c = desk_config(7);
    c.n_paths = 2000;
    const PathEnsembleSummary s = simulate_paths(p, singleton_strategies(g), c, Vec{0.0, 0.0});
    const double tail = s.trace_mean_norm2.back();
    CHECK(tail == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("constant payoff is estimated exactly with zero variance") {
    GameProblem p = testing::scalar_problem(testing::neg_x, 1.0, testing::zero_fn);
    p.payoff = [](const Vec&, const Control&, const Control&) { return 3.25; };
    const Grid g(1, 4.0, 41, Boundary::one_sided);
    SimConfig c = desk_config();
    c.n_paths = 40;
    c.horizon = 4.0;
    const PayoffEstimate e = estimate_beta(p, singleton_strategies(g), c, Vec{1.0, 0.0});
    CHECK(e.mean == doctest::Approx(3.25).epsilon(1e-12));
    CHECK(e.half_width < 1e-10);
}

TEST_CASE("long-run average payoff matches the known ergodic value") {
    const GameProblem p = make_problem("ou1d");
    const Grid g(1, 6.0, 61, Boundary::one_sided);
    SimConfig c = desk_config(11);
    c.n_paths = 2000;
    c.horizon = 30.0;
    const PayoffEstimate e = estimate_beta(p, singleton_strategies(g), c, Vec{0.0, 0.0});
    CHECK(std::abs(e.mean - 1.0) < std::max(3.0 * e.half_width, 0.05));
    CHECK(e.n_effective == 2000);
}

TEST_CASE("bias estimate vanishes when the start is already inside the ball") {
    const GameProblem p = make_problem("ou1d");
    const Grid g(1, 6.0, 61, Boundary::one_sided);
    SimConfig c = desk_config();
    c.n_paths = 20;
    const BiasEstimate b =
        estimate_bias(p, singleton_strategies(g), c, Vec{0.01, 0.0}, 1.0, 0.05);
    CHECK(b.estimate.mean == 0.0);
    CHECK(b.n_failed == 0);
    CHECK(!b.flagged);
}

TEST_CASE("bias estimate is zero when the payoff equals its average") {
    GameProblem p = testing::scalar_problem(testing::neg_x, 1.0, testing::zero_fn);
    p.payoff = [](const Vec&, const Control&, const Control&) { return 2.0; };
    const Grid g(1, 4.0, 41, Boundary::one_sided);
    SimConfig c = desk_config();
    c.n_paths = 50;
    const BiasEstimate b = estimate_bias(p, singleton_strategies(g), c, Vec{1.5, 0.0}, 2.0, 0.1);
    CHECK(std::abs(b.estimate.mean) < 1e-12);
}

TEST_CASE("bias estimate approximates the closed-form bias function") {
    // For dX = -X dt + sqrt(2) dW, h = x^2: phi*(x) = x^2 / 2, so starting at
    // x0 = 1.5 the expected accumulated excess payoff is about 1.125.
    const GameProblem p = make_problem("ou1d");
    const Grid g(1, 6.0, 61, Boundary::one_sided);
    SimConfig c = desk_config(5);
    c.dt_sim = 2e-3;
    c.n_paths = 4000;
    c.horizon = 40.0;
    const BiasEstimate b =
        estimate_bias(p, singleton_strategies(g), c, Vec{1.5, 0.0}, 1.0, 0.05);
    CHECK(!b.flagged);
    CHECK(std::abs(b.estimate.mean - 1.125) < std::max(3.0 * b.estimate.half_width, 0.12));
}

TEST_CASE("geometric drift bound holds for the calibrated certificate") {
    const GameProblem p = make_problem("ou1d");
    const Grid g(1, 6.0, 61, Boundary::one_sided);
    SimConfig c = desk_config(3);
    c.n_paths = 1500;
    const DiagnosticReport r = check_drift_bound(p, singleton_strategies(g), c, Vec{2.0, 0.0});
    CHECK(r.pass);
}

TEST_CASE("geometric drift bound fails for an overstated decay rate") {
    GameProblem p = make_problem("ou1d");
    p.lyapunov->k1 = 10.0;  // claims E[V] decays like e^{-20 t}; it does not
    const Grid g(1, 6.0, 61, Boundary::one_sided);
    SimConfig c = desk_config(3);
    c.n_paths = 1500;
    const DiagnosticReport r = check_drift_bound(p, singleton_strategies(g), c, Vec{2.0, 0.0});
    CHECK(!r.pass);
}

TEST_CASE("simulation configuration is validated") {
    SimConfig c = desk_config();
    c.dt_sim = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = desk_config();
    c.n_paths = 0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = desk_config();
    c.burn_in = 1.5;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = desk_config();
    c.n_batches = 1;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("sampled and averaged strategy realizations agree in expectation") {
    // Two-control drift pushes +/-0.5 with equal weight: mean drift is -x.
    GameProblem p = make_problem("ou1d");
    p.u1 = ControlSet{{Control{-0.5}, Control{0.5}}, 1};
    p.drift = [](const Vec& x, const Control& u, const Control&) {
        return Vec{-x[0] + u[0], 0.0};
    };
    const Grid g(1, 6.0, 31, Boundary::one_sided);
    StrategyField s(g, 2, 1);
    for (auto& v : s.v1) v = MixedStrategy::uniform(2);

    SimConfig c = desk_config(21);
    c.n_paths = 2500;
    c.horizon = 15.0;
    c.mode = StrategyMode::sample_pure;
    const PayoffEstimate sampled = estimate_beta(p, s, c, Vec{0.0, 0.0});
    c.mode = StrategyMode::mean_drift;
    const PayoffEstimate averaged = estimate_beta(p, s, c, Vec{0.0, 0.0});
    CHECK(std::abs(sampled.mean - averaged.mean) <
          std::max(3.0 * (sampled.half_width + averaged.half_width), 0.08));
}
