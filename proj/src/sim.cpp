#include "sdg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"
#include "sdg/errors.hpp"

namespace sdg {

void SimConfig::validate() const {
    if (dt_sim <= 0.0) throw InvalidInput("SimConfig: dt_sim must be positive");
    if (horizon <= 0.0) throw InvalidInput("SimConfig: horizon must be positive");
    if (burn_in < 0.0 || burn_in >= 1.0) throw InvalidInput("SimConfig: burn_in must be in [0,1)");
    if (n_paths < 1) throw InvalidInput("SimConfig: n_paths must be >= 1");
    if (n_batches < 2) throw InvalidInput("SimConfig: n_batches must be >= 2");
}

namespace {

// 97.5% Student-t quantile for small degrees of freedom; 1.96 beyond the table.
double t_quantile_975(int dof) {
    static const double table[30] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                     2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                     2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                     2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
    if (dof < 1) return 12.706;
    if (dof <= 30) return table[dof - 1];
    return 1.96;
}

/// Batch-means 95% CI over per-path scalars, order-fixed by pairwise sums.
PayoffEstimate batch_means(const std::vector<double>& samples, int n_batches) {
    PayoffEstimate est;
    est.n_effective = static_cast<long>(samples.size());
    if (samples.empty()) return est;
    est.mean = pairwise_sum(samples) / static_cast<double>(samples.size());
    const int nb = std::min<int>(n_batches, static_cast<int>(samples.size()));
    if (nb < 2) return est;  // single sample: no spread information
    std::vector<double> bmeans(static_cast<std::size_t>(nb), 0.0);
    const std::size_t n = samples.size();
    for (int b = 0; b < nb; ++b) {
        const std::size_t lo = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(nb);
        const std::size_t hi = n * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(nb);
        bmeans[static_cast<std::size_t>(b)] =
            pairwise_sum(samples, lo, hi) / static_cast<double>(hi - lo);
    }
    double ss = 0.0;
    for (double m : bmeans) ss += (m - est.mean) * (m - est.mean);
    const double se = std::sqrt(ss / (nb - 1)) / std::sqrt(static_cast<double>(nb));
    est.half_width = t_quantile_975(nb - 1) * se;
    return est;
}

struct Interpolated {
    MixedStrategy v1;
    MixedStrategy v2;
};

/// Multilinear interpolation of both mixed-strategy fields at x (clamped to
/// the box). Interpolated weights still sum to 1 by linearity.
Interpolated interp_strategies(const StrategyField& s, const Vec& x) {
    const Grid& g = s.grid;
    int corner[2][2] = {{0, 0}, {0, 0}};
    double frac[2] = {0.0, 0.0};
    for (int k = 0; k < g.dim; ++k) {
        double t = (x[k] + g.radius) / g.spacing;
        t = std::clamp(t, 0.0, static_cast<double>(g.n - 1));
        int i0 = std::min(static_cast<int>(t), g.n - 2);
        i0 = std::max(i0, 0);
        corner[k][0] = i0;
        corner[k][1] = std::min(i0 + 1, g.n - 1);
        frac[k] = t - i0;
    }
    const int m1 = s.v1.front().size();
    const int m2 = s.v2.front().size();
    Interpolated out;
    out.v1.weights.assign(static_cast<std::size_t>(m1), 0.0);
    out.v2.weights.assign(static_cast<std::size_t>(m2), 0.0);
    const int nk = g.dim == 1 ? 2 : 4;
    for (int c = 0; c < nk; ++c) {
        const int a0 = c & 1;
        const int a1 = (c >> 1) & 1;
        double w = (a0 ? frac[0] : 1.0 - frac[0]);
        int node;
        if (g.dim == 1) {
            node = g.index(corner[0][a0]);
        } else {
            w *= (a1 ? frac[1] : 1.0 - frac[1]);
            node = g.index(corner[0][a0], corner[1][a1]);
        }
        if (w == 0.0) continue;
        const auto& w1 = s.v1[static_cast<std::size_t>(node)].weights;
        const auto& w2 = s.v2[static_cast<std::size_t>(node)].weights;
        for (int i = 0; i < m1; ++i) out.v1.weights[static_cast<std::size_t>(i)] += w * w1[static_cast<std::size_t>(i)];
        for (int j = 0; j < m2; ++j) out.v2.weights[static_cast<std::size_t>(j)] += w * w2[static_cast<std::size_t>(j)];
    }
    return out;
}

int sample_index(const std::vector<double>& weights, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

std::mt19937_64 path_rng(std::uint64_t seed, long path) {
    std::seed_seq sq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(path),
                     static_cast<std::uint64_t>(0x9e3779b97f4a7c15ULL)};
    return std::mt19937_64(sq);
}

/// Drift/payoff at x under the local strategy mix for one Euler step.
struct StepCoeffs {
    Vec b{};
    double h = 0.0;
};

StepCoeffs step_coeffs(const GameProblem& problem, const StrategyField& strategies, const Vec& x,
                       StrategyMode mode, std::mt19937_64& rng,
                       std::uniform_real_distribution<double>& unif) {
    const Interpolated mix = interp_strategies(strategies, x);
    StepCoeffs sc;
    if (mode == StrategyMode::sample_pure) {
        // Two uniforms are always drawn so the stream layout is mode-invariant
        // per step count.
        const int i = sample_index(mix.v1.weights, unif(rng));
        const int j = sample_index(mix.v2.weights, unif(rng));
        const Control& u1 = problem.u1.points[static_cast<std::size_t>(i)];
        const Control& u2 = problem.u2.points[static_cast<std::size_t>(j)];
        sc.b = problem.drift(x, u1, u2);
        sc.h = problem.payoff(x, u1, u2);
    } else {
        sc.b = relax_drift(problem, x, mix.v1, mix.v2);
        sc.h = relax_payoff(problem, x, mix.v1, mix.v2);
    }
    return sc;
}

}  // namespace

PathEnsembleSummary simulate_paths(const GameProblem& problem, const StrategyField& strategies,
                                   const SimConfig& config, const Vec& x0) {
    config.validate();
    problem.validate();
    const Grid& grid = strategies.grid;
    for (int k = 0; k < grid.dim; ++k)
        if (std::abs(x0[k]) > grid.radius)
            throw InvalidInput("simulate_paths: x0 outside the grid domain");

    const long steps = std::max<long>(1, static_cast<long>(std::llround(config.horizon / config.dt_sim)));
    const long burn_steps = static_cast<long>(config.burn_in * static_cast<double>(steps));
    const double sq_dt = std::sqrt(config.dt_sim);

    // Checkpoint layout for the moment traces.
    const int n_trace = static_cast<int>(std::min<long>(steps, 200));
    std::vector<long> trace_steps(static_cast<std::size_t>(n_trace));
    for (int t = 0; t < n_trace; ++t)
        trace_steps[static_cast<std::size_t>(t)] = steps * static_cast<long>(t + 1) / n_trace;

    PathEnsembleSummary out;
    out.n_paths = config.n_paths;
    out.horizon = config.horizon;
    out.dt = config.dt_sim;
    out.trace_time.resize(static_cast<std::size_t>(n_trace));
    out.trace_mean_x0.assign(static_cast<std::size_t>(n_trace), 0.0);
    out.trace_mean_norm2.assign(static_cast<std::size_t>(n_trace), 0.0);
    out.trace_mean_lyap.assign(static_cast<std::size_t>(n_trace), 0.0);
    out.trace_running_avg.assign(static_cast<std::size_t>(n_trace), 0.0);
    for (int t = 0; t < n_trace; ++t)
        out.trace_time[static_cast<std::size_t>(t)] =
            static_cast<double>(trace_steps[static_cast<std::size_t>(t)]) * config.dt_sim;

    const bool has_lyap = problem.lyapunov.has_value();
    std::vector<double> path_avgs(static_cast<std::size_t>(config.n_paths), 0.0);
    // Per-path Lyapunov values at each checkpoint, for per-checkpoint CIs.
    std::vector<double> lyap_vals;
    if (has_lyap)
        lyap_vals.assign(static_cast<std::size_t>(config.n_paths) * n_trace, 0.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    for (long p = 0; p < config.n_paths; ++p) {
        std::mt19937_64 rng = path_rng(config.seed, p);
        Vec x = x0;
        double payoff_int = 0.0;       // full-horizon running integral (traces)
        double payoff_tail = 0.0;      // post-burn-in integral (estimate)
        std::size_t next_trace = 0;
        for (long s = 0; s < steps; ++s) {
            const StepCoeffs sc =
                step_coeffs(problem, strategies, x, config.mode, rng, unif);
            payoff_int += sc.h * config.dt_sim;
            if (s >= burn_steps) payoff_tail += sc.h * config.dt_sim;
            const Mat sig = problem.sigma(x);
            Vec noise{};
            for (int k = 0; k < grid.dim; ++k) noise[k] = normal(rng);
            for (int k = 0; k < grid.dim; ++k) {
                double dx = sc.b[k] * config.dt_sim;
                for (int l = 0; l < grid.dim; ++l) dx += sig[k][l] * sq_dt * noise[l];
                x[k] += dx;
            }
            bool clamped = false;
            for (int k = 0; k < grid.dim; ++k) {
                if (x[k] > grid.radius) { x[k] = grid.radius; clamped = true; }
                if (x[k] < -grid.radius) { x[k] = -grid.radius; clamped = true; }
            }
            if (clamped) ++out.reflections;
            while (next_trace < trace_steps.size() && s + 1 == trace_steps[next_trace]) {
                out.trace_mean_x0[next_trace] += x[0];
                out.trace_mean_norm2[next_trace] += dot(x, x, grid.dim);
                if (has_lyap) {
                    const double v = problem.lyapunov->V(x);
                    out.trace_mean_lyap[next_trace] += v;
                    lyap_vals[static_cast<std::size_t>(p) * n_trace + next_trace] = v;
                }
                out.trace_running_avg[next_trace] +=
                    payoff_int / (static_cast<double>(s + 1) * config.dt_sim);
                ++next_trace;
            }
        }
        const double tail_time = static_cast<double>(steps - burn_steps) * config.dt_sim;
        path_avgs[static_cast<std::size_t>(p)] = payoff_tail / tail_time;
    }
    const double inv_np = 1.0 / static_cast<double>(config.n_paths);
    for (int t = 0; t < n_trace; ++t) {
        out.trace_mean_x0[static_cast<std::size_t>(t)] *= inv_np;
        out.trace_mean_norm2[static_cast<std::size_t>(t)] *= inv_np;
        out.trace_mean_lyap[static_cast<std::size_t>(t)] *= inv_np;
        out.trace_running_avg[static_cast<std::size_t>(t)] *= inv_np;
    }
    out.avg_payoff = batch_means(path_avgs, config.n_batches);
    if (has_lyap) {
        out.trace_lyap_half_width.assign(static_cast<std::size_t>(n_trace), 0.0);
        std::vector<double> column(static_cast<std::size_t>(config.n_paths));
        for (int t = 0; t < n_trace; ++t) {
            for (long p = 0; p < config.n_paths; ++p)
                column[static_cast<std::size_t>(p)] =
                    lyap_vals[static_cast<std::size_t>(p) * n_trace + t];
            out.trace_lyap_half_width[static_cast<std::size_t>(t)] =
                batch_means(column, config.n_batches).half_width;
        }
    }
    return out;
}

PayoffEstimate estimate_beta(const GameProblem& problem, const StrategyField& strategies,
                             const SimConfig& config, const Vec& x0) {
    return simulate_paths(problem, strategies, config, x0).avg_payoff;
}

BiasEstimate estimate_bias(const GameProblem& problem, const StrategyField& strategies,
                           const SimConfig& config, const Vec& x0, double beta, double r_small) {
    config.validate();
    problem.validate();
    const Grid& grid = strategies.grid;
    if (r_small <= 0.0) throw InvalidInput("estimate_bias: r_small must be positive");
    const double sq_dt = std::sqrt(config.dt_sim);
    const long steps = std::max<long>(1, static_cast<long>(std::llround(config.horizon / config.dt_sim)));

    BiasEstimate out;
    if (norm2(x0, grid.dim) <= r_small) {  // already inside: tau = 0
        out.estimate.n_effective = config.n_paths;
        return out;
    }

    std::vector<double> integrals(static_cast<std::size_t>(config.n_paths), 0.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (long p = 0; p < config.n_paths; ++p) {
        std::mt19937_64 rng = path_rng(config.seed, p);
        Vec x = x0;
        double integral = 0.0;
        bool hit = false;
        for (long s = 0; s < steps; ++s) {
            const StepCoeffs sc = step_coeffs(problem, strategies, x, config.mode, rng, unif);
            integral += (sc.h - beta) * config.dt_sim;
            const Mat sig = problem.sigma(x);
            Vec noise{};
            for (int k = 0; k < grid.dim; ++k) noise[k] = normal(rng);
            for (int k = 0; k < grid.dim; ++k) {
                double dx = sc.b[k] * config.dt_sim;
                for (int l = 0; l < grid.dim; ++l) dx += sig[k][l] * sq_dt * noise[l];
                x[k] += dx;
            }
            for (int k = 0; k < grid.dim; ++k) x[k] = std::clamp(x[k], -grid.radius, grid.radius);
            if (norm2(x, grid.dim) <= r_small) {  // hitting at step resolution
                hit = true;
                break;
            }
        }
        if (!hit) ++out.n_failed;
        integrals[static_cast<std::size_t>(p)] = integral;
    }
    out.estimate = batch_means(integrals, config.n_batches);
    out.estimate.n_effective = config.n_paths - out.n_failed;
    out.fail_fraction = static_cast<double>(out.n_failed) / static_cast<double>(config.n_paths);
    out.flagged = out.fail_fraction > 0.01;
    return out;
}

DiagnosticReport check_drift_bound(const GameProblem& problem, const StrategyField& strategies,
                                   const SimConfig& config, const Vec& x0) {
    problem.validate();
    if (!problem.lyapunov || problem.lyapunov->mode != LyapunovMode::A3)
        throw InvalidInput("check_drift_bound: geometric-form Lyapunov certificate required");
    const LyapunovCertificate& cert = *problem.lyapunov;
    const PathEnsembleSummary sum = simulate_paths(problem, strategies, config, x0);

    DiagnosticReport rep;
    rep.pass = true;
    rep.worst = -1e300;
    const double floor_bound = cert.k0 / (2.0 * cert.k1);
    const double vx0 = cert.V(x0);
    for (std::size_t t = 0; t < sum.trace_time.size(); ++t) {
        const double time = sum.trace_time[t];
        const double est = sum.trace_mean_lyap[t];
        // Per-checkpoint batch-means CI; the Euler step contributes an O(dt)
        // bias to stationary moments, covered by the dt-proportional slack.
        // The slack is 4x the half-width because the pass condition takes a
        // maximum over ~200 correlated checkpoints.
        const double ci = 4.0 * sum.trace_lyap_half_width[t] + est * config.dt_sim + 1e-3;
        const double bound = floor_bound + vx0 * std::exp(-2.0 * cert.k1 * time);
        const double margin = est - ci - bound;
        if (margin > rep.worst) rep.worst = margin;
        if (margin > 0.0) rep.pass = false;
        if (t < 8 || t + 1 == sum.trace_time.size())
            rep.details.emplace_back("margin_t=" + format_double(time), margin);
    }
    rep.summary = rep.pass ? "moment bound holds at all checkpoints"
                           : "moment bound violated; worst margin " + format_double(rep.worst);
    return rep;
}

void write_trace_csv(const PathEnsembleSummary& summary, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw InvalidInput("write_trace_csv: cannot open " + path);
    os << "time,mean_x0,mean_norm2,mean_lyapunov,running_avg\n";
    for (std::size_t t = 0; t < summary.trace_time.size(); ++t)
        os << format_double(summary.trace_time[t]) << ',' << format_double(summary.trace_mean_x0[t])
           << ',' << format_double(summary.trace_mean_norm2[t]) << ','
           << format_double(summary.trace_mean_lyap[t]) << ','
           << format_double(summary.trace_running_avg[t]) << '\n';
}

void write_estimates_json(const std::vector<std::pair<std::string, PayoffEstimate>>& estimates,
                          const std::string& problem_name, const std::string& path) {
    nlohmann::json j;
    j["problem"] = problem_name;
    for (const auto& [name, est] : estimates)
        j["estimates"][name] = {{"mean", est.mean},
                                {"half_width", est.half_width},
                                {"n_effective", est.n_effective}};
    std::ofstream os(path);
    if (!os) throw InvalidInput("write_estimates_json: cannot open " + path);
    os << j.dump(2) << '\n';
}

}  // namespace sdg
