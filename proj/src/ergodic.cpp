#include "sdg/ergodic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "sdg/errors.hpp"

namespace sdg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Game value with allocation-free fast paths; falls back to the LP for
// anything bigger than 2x2 without a pure saddle.
double node_game_value(const Assembly& as, const std::vector<double>& f, int node) {
    const int m1 = as.m1, m2 = as.m2;
    if (m1 == 1 && m2 == 1) return as.stencil(node, 0, 0).apply(f, node) + as.payoff(node, 0, 0);
    if (m1 * m2 <= 4) {
        double g[4];
        for (int i = 0; i < m1; ++i)
            for (int j = 0; j < m2; ++j)
                g[i * m2 + j] = as.stencil(node, i, j).apply(f, node) + as.payoff(node, i, j);
        if (m1 == 1) return *std::min_element(g, g + m2);
        if (m2 == 1) return *std::max_element(g, g + m1);
        // 2x2: pure saddle scan, else the equalizing mixture.
        const double maxmin = std::max(std::min(g[0], g[1]), std::min(g[2], g[3]));
        const double minmax = std::min(std::max(g[0], g[2]), std::max(g[1], g[3]));
        if (maxmin == minmax) return maxmin;
        return (g[0] * g[3] - g[1] * g[2]) / (g[0] + g[3] - g[1] - g[2]);
    }
    return solve_matrix_game(as.game_matrix(f, node)).value;
}

// Mixed-strategy averaged row of the linear system at one node:
// diag, neighbor weights, payoff under (v1, v2).
struct MixedRow {
    double diag = 0.0;
    double payoff = 0.0;
    int count = 0;
    std::array<std::pair<int, double>, 16> nb{};

    void accumulate(const Stencil& st, double w) {
        diag += w * st.diag;
        for (int k = 0; k < st.count; ++k) {
            const auto& [j, wj] = st.nb[static_cast<std::size_t>(k)];
            bool found = false;
            for (int q = 0; q < count; ++q)
                if (nb[static_cast<std::size_t>(q)].first == j) {
                    nb[static_cast<std::size_t>(q)].second += w * wj;
                    found = true;
                    break;
                }
            if (!found) nb[static_cast<std::size_t>(count++)] = {j, w * wj};
        }
    }
};

MixedRow mixed_row(const Assembly& as, int node, const MixedStrategy& v1,
                   const MixedStrategy& v2) {
    MixedRow row;
    for (int i = 0; i < as.m1; ++i) {
        const double wi = v1.weights[static_cast<std::size_t>(i)];
        if (wi == 0.0) continue;
        for (int j = 0; j < as.m2; ++j) {
            const double w = wi * v2.weights[static_cast<std::size_t>(j)];
            if (w == 0.0) continue;
            row.accumulate(as.stencil(node, i, j), w);
            row.payoff += w * as.payoff(node, i, j);
        }
    }
    return row;
}

// Linear policy-evaluation solve: (alpha - L_v) psi = h_v with psi = 0 on the
// boundary. Direct tridiagonal in 1D; Gauss-Seidel row-major sweeps in 2D.
void policy_evaluation(const Assembly& as, const std::vector<MixedRow>& rows, double alpha,
                       std::vector<double>& psi, const SolveOptions& opts) {
    const Grid& grid = as.grid;
    const int nn = grid.num_nodes();
    if (grid.dim == 1) {
        std::vector<double> lo(static_cast<std::size_t>(nn), 0.0),
            di(static_cast<std::size_t>(nn), 1.0), up(static_cast<std::size_t>(nn), 0.0),
            rhs(static_cast<std::size_t>(nn), 0.0);
        for (int i = 1; i < nn - 1; ++i) {
            const MixedRow& r = rows[static_cast<std::size_t>(i)];
            di[static_cast<std::size_t>(i)] = alpha - r.diag;
            for (int k = 0; k < r.count; ++k) {
                const auto& [j, w] = r.nb[static_cast<std::size_t>(k)];
                if (j == i - 1)
                    lo[static_cast<std::size_t>(i)] = -w;
                else if (j == i + 1)
                    up[static_cast<std::size_t>(i)] = -w;
            }
            rhs[static_cast<std::size_t>(i)] = r.payoff;
        }
        // Thomas sweep.
        for (int i = 1; i < nn; ++i) {
            const double m = lo[static_cast<std::size_t>(i)] / di[static_cast<std::size_t>(i - 1)];
            di[static_cast<std::size_t>(i)] -= m * up[static_cast<std::size_t>(i - 1)];
            rhs[static_cast<std::size_t>(i)] -= m * rhs[static_cast<std::size_t>(i - 1)];
        }
        psi[static_cast<std::size_t>(nn - 1)] =
            rhs[static_cast<std::size_t>(nn - 1)] / di[static_cast<std::size_t>(nn - 1)];
        for (int i = nn - 2; i >= 0; --i)
            psi[static_cast<std::size_t>(i)] =
                (rhs[static_cast<std::size_t>(i)] -
                 up[static_cast<std::size_t>(i)] * psi[static_cast<std::size_t>(i + 1)]) /
                di[static_cast<std::size_t>(i)];
        return;
    }
    // 2D: stationary Gauss-Seidel, ascending row-major sweep order.
    double scale = 1.0;
    for (int node = 0; node < nn; ++node)
        if (!grid.is_boundary(node))
            scale = std::max(scale, std::abs(rows[static_cast<std::size_t>(node)].payoff));
    for (int sweep = 0; sweep < opts.max_linear_sweeps; ++sweep) {
        double max_res = 0.0;
        for (int node = 0; node < nn; ++node) {
            if (grid.is_boundary(node)) {
                psi[static_cast<std::size_t>(node)] = 0.0;
                continue;
            }
            const MixedRow& r = rows[static_cast<std::size_t>(node)];
            double off = 0.0;
            for (int k = 0; k < r.count; ++k) {
                const auto& [j, w] = r.nb[static_cast<std::size_t>(k)];
                off += w * psi[static_cast<std::size_t>(j)];
            }
            const double next = (r.payoff + off) / (alpha - r.diag);
            max_res = std::max(max_res, std::abs(next - psi[static_cast<std::size_t>(node)]) *
                                            (alpha - r.diag));
            psi[static_cast<std::size_t>(node)] = next;
        }
        if (max_res <= opts.linear_tol * scale) return;
    }
    throw ConvergenceError("policy_evaluation: Gauss-Seidel did not reach tolerance");
}

}  // namespace

std::pair<ValueField, StrategyField> solve_discounted(const GameProblem& problem, const Grid& grid,
                                                      double alpha, const SolveOptions& opts,
                                                      SolveReport* report,
                                                      const ValueField* warm_start) {
    if (alpha <= 0.0) throw InvalidInput("solve_discounted: alpha must be positive");
    if (grid.boundary != Boundary::dirichlet_zero)
        throw InvalidInput("solve_discounted: grid boundary policy must be dirichlet_zero");
    const auto t0 = Clock::now();
    const Assembly as = build_assembly(problem, grid);
    const int nn = grid.num_nodes();

    ValueField psi = warm_start ? *warm_start : ValueField(grid, 0.0, FieldTag::discounted);
    psi.tag = FieldTag::discounted;
    psi.tag_param = alpha;
    StrategyField strategies(grid, as.m1, as.m2);
    std::vector<MixedRow> rows(static_cast<std::size_t>(nn));

    SolveReport rep;
    rep.method = "discounted_policy_iteration";
    bool done = false;
    for (int sweep = 0; sweep < opts.max_policy_sweeps && !done; ++sweep) {
        double bellman_res = 0.0;
        for (int node = 0; node < nn; ++node) {
            if (grid.is_boundary(node)) continue;
            const GameSolution gs = solve_matrix_game(as.game_matrix(psi.values, node));
            strategies.v1[static_cast<std::size_t>(node)] = gs.v1;
            strategies.v2[static_cast<std::size_t>(node)] = gs.v2;
            rows[static_cast<std::size_t>(node)] = mixed_row(as, node, gs.v1, gs.v2);
            bellman_res = std::max(bellman_res, std::abs(alpha * psi[node] - gs.value));
        }
        std::vector<double> prev = psi.values;
        policy_evaluation(as, rows, alpha, psi.values, opts);
        double delta = 0.0;
        for (int i = 0; i < nn; ++i)
            delta = std::max(delta, std::abs(psi[i] - prev[static_cast<std::size_t>(i)]));
        rep.iterations = sweep + 1;
        rep.residual_history.push_back({sweep, 0.0, bellman_res, delta});
        if (delta <= opts.policy_tol * alpha) done = true;
    }
    if (!done) {
        std::ostringstream os;
        os << "solve_discounted: policy iteration did not converge in " << opts.max_policy_sweeps
           << " sweeps (alpha=" << alpha << ")";
        throw ConvergenceError(os.str());
    }
    psi.assert_finite("solve_discounted");
    rep.converged = true;
    rep.wall_seconds = seconds_since(t0);
    if (report) *report = rep;
    return {psi, strategies};
}

double elliptic_residual(const GameProblem& problem, const Grid& grid, const ValueField& phi,
                         double beta) {
    const Assembly as = build_assembly(problem, grid);
    ValueField shifted = phi;
    const double p0 = phi.at_origin();
    for (double& v : shifted.values) v -= p0;
    double worst = 0.0;
    for (int node = 0; node < grid.num_nodes(); ++node) {
        if (!grid.in_core(node)) continue;
        if (grid.boundary == Boundary::dirichlet_zero && grid.is_boundary(node)) continue;
        worst = std::max(worst, std::abs(node_game_value(as, shifted.values, node) - beta));
    }
    return worst;
}

ErgodicSolution vanishing_discount(const GameProblem& problem, const Grid& grid,
                                   const std::vector<double>& alphas, const SolveOptions& opts) {
    if (alphas.empty()) throw InvalidInput("vanishing_discount: empty discount schedule");
    for (std::size_t i = 0; i + 1 < alphas.size(); ++i)
        if (alphas[i + 1] >= alphas[i])
            throw InvalidInput("vanishing_discount: alphas must be strictly decreasing");
    if (alphas.back() <= 0.0) throw InvalidInput("vanishing_discount: alphas must stay positive");

    const auto t0 = Clock::now();
    ErgodicSolution sol;
    sol.report.method = "vanishing_discount";
    ValueField psi(grid, 0.0, FieldTag::discounted);
    StrategyField strat;
    std::vector<double> beta_trend;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        SolveReport inner;
        auto [psi_a, strat_a] = solve_discounted(problem, grid, alphas[i], opts, &inner, &psi);
        psi = psi_a;
        strat = strat_a;
        const double beta_hat = alphas[i] * psi.at_origin();
        beta_trend.push_back(beta_hat);
        sol.report.iterations += inner.iterations;
        sol.report.add("alpha_" + std::to_string(i), alphas[i]);
        sol.report.add("beta_hat_" + std::to_string(i), beta_hat);
    }
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < beta_trend.size(); ++i)
        if (beta_trend[i + 1] < beta_trend[i] - 1e-6) monotone = false;
    sol.report.add("beta_trend_monotone", monotone ? 1.0 : 0.0);

    sol.beta = beta_trend.back();
    sol.phi_star = psi;
    const double p0 = psi.at_origin();
    for (double& v : sol.phi_star.values) v -= p0;
    sol.phi_star.tag = FieldTag::ergodic;
    sol.selectors = strat;

    const double resid = elliptic_residual(problem, grid, sol.phi_star, sol.beta);
    sol.report.add("elliptic_residual_core", resid);
    sol.report.converged = resid <= opts.residual_tol;
    if (!sol.report.converged)
        throw ConvergenceError("vanishing_discount: elliptic residual " + std::to_string(resid) +
                               " exceeds tolerance " + std::to_string(opts.residual_tol));
    sol.report.residual_history.push_back(
        {static_cast<long>(alphas.size()), 0.0, resid, sol.beta});
    sol.report.wall_seconds = seconds_since(t0);
    return sol;
}

namespace {

struct MarchOut {
    ValueField phi;
    SolveReport report;
    std::vector<double> origin_trace;  // phi(t_n, 0) at every step start
};

// Shared explicit Euler marcher. offset_beta == nullptr selects the RVI
// offset (origin value at the step start), otherwise the fixed beta of VI.
MarchOut march(const GameProblem& problem, const Grid& grid, const ValueField& phi0,
               const double* offset_beta, double dt, double t_end, const SolveOptions& opts) {
    if (t_end <= 0.0) throw InvalidInput("march: t_end must be positive");
    if (!phi0.grid.same_layout(grid)) throw InvalidInput("march: phi0 grid mismatch");
    const auto t0 = Clock::now();
    const Assembly as = build_assembly(problem, grid);
    if (dt <= 0.0) dt = as.cfl_dt;  // unset step selects the CFL-stable default
    if (dt > as.cfl_dt * (1.0 + 1e-12))
        throw InvalidInput("march: dt violates the CFL bound " + std::to_string(as.cfl_dt));

    const long nsteps = static_cast<long>(std::llround(t_end / dt));
    const int nn = grid.num_nodes();
    MarchOut out;
    out.phi = phi0;
    out.phi.tag = FieldTag::parabolic;
    out.origin_trace.reserve(static_cast<std::size_t>(nsteps) + 1);
    std::vector<double> rhs(static_cast<std::size_t>(nn), 0.0);
    out.report.method = offset_beta ? "vi_march" : "rvi_march";

    for (long step = 0; step < nsteps; ++step) {
        const double origin = out.phi.at_origin();
        out.origin_trace.push_back(origin);
        const double offset = offset_beta ? *offset_beta : origin;
        for (int node = 0; node < nn; ++node) {
            if (grid.boundary == Boundary::dirichlet_zero && grid.is_boundary(node)) {
                rhs[static_cast<std::size_t>(node)] = 0.0;
                continue;
            }
            rhs[static_cast<std::size_t>(node)] =
                node_game_value(as, out.phi.values, node) - offset;
        }
        double core_change = 0.0;
        for (int node = 0; node < nn; ++node) {
            const double d = dt * rhs[static_cast<std::size_t>(node)];
            out.phi.values[static_cast<std::size_t>(node)] += d;
            if (grid.in_core(node)) core_change = std::max(core_change, std::abs(d));
        }
        if (step % opts.record_stride == 0 || step == nsteps - 1)
            out.report.residual_history.push_back(
                {step, (step + 1) * dt, core_change / dt, offset});
        if (step % 200 == 0 && !std::isfinite(out.phi.at_origin()))
            throw DivergenceError("march: NaN detected at step " + std::to_string(step));
    }
    out.origin_trace.push_back(out.phi.at_origin());
    out.phi.assert_finite("march");
    out.phi.tag_param = t_end;
    out.report.iterations = nsteps;
    out.report.converged = true;
    out.report.wall_seconds = seconds_since(t0);
    return out;
}

double tail_average(const std::vector<double>& trace, double fraction) {
    const std::size_t n = trace.size();
    const std::size_t start = n - std::max<std::size_t>(1, static_cast<std::size_t>(fraction * n));
    std::vector<double> tail(trace.begin() + static_cast<std::ptrdiff_t>(start), trace.end());
    return pairwise_sum(tail) / static_cast<double>(tail.size());
}

}  // namespace

std::pair<ValueField, SolveReport> vi_march(const GameProblem& problem, const Grid& grid,
                                            const ValueField& phi0, double beta, double dt,
                                            double t_end, const SolveOptions& opts) {
    if (!std::isfinite(beta)) throw InvalidInput("vi_march: beta must be finite");
    MarchOut out = march(problem, grid, phi0, &beta, dt, t_end, opts);
    return {out.phi, out.report};
}

std::pair<ValueField, SolveReport> rvi_march(const GameProblem& problem, const Grid& grid,
                                             const ValueField& phi0, double dt, double t_end,
                                             const SolveOptions& opts) {
    MarchOut out = march(problem, grid, phi0, nullptr, dt, t_end, opts);
    out.report.add("beta_rvi", tail_average(out.origin_trace, opts.beta_avg_fraction));
    return {out.phi, out.report};
}

ErgodicSolution solve_rvi(const GameProblem& problem, const Grid& grid, double dt, double t_end,
                          const SolveOptions& opts) {
    const ValueField phi0(grid, 0.0, FieldTag::parabolic);
    MarchOut out = march(problem, grid, phi0, nullptr, dt, t_end, opts);
    ErgodicSolution sol;
    sol.report = out.report;
    sol.report.method = "rvi";
    sol.beta = tail_average(out.origin_trace, opts.beta_avg_fraction);
    sol.phi_star = out.phi;
    const double p0 = out.phi.at_origin();
    for (double& v : sol.phi_star.values) v -= p0;
    sol.phi_star.tag = FieldTag::ergodic;
    sol.selectors = extract_selectors(problem, grid, sol.phi_star);
    const double resid = elliptic_residual(problem, grid, sol.phi_star, sol.beta);
    sol.report.add("beta_rvi", sol.beta);
    sol.report.add("elliptic_residual_core", resid);
    sol.report.converged = resid <= opts.residual_tol;
    return sol;
}

DiagnosticReport check_lemma33(const GameProblem& problem, const Grid& grid,
                               const ValueField& phi0, double beta, double dt, double t_end,
                               const SolveOptions& opts) {
    if (dt <= 0.0 || t_end <= dt) throw InvalidInput("check_lemma33: bad march parameters");
    if (!phi0.grid.same_layout(grid)) throw InvalidInput("check_lemma33: phi0 grid mismatch");
    const Assembly as = build_assembly(problem, grid);
    if (dt > as.cfl_dt * (1.0 + 1e-12))
        throw InvalidInput("check_lemma33: dt violates the CFL bound");

    const long nsteps = static_cast<long>(std::llround(t_end / dt));
    const long stride = std::max<long>(1, nsteps / 10);
    const int nn = grid.num_nodes();

    ValueField phi = phi0, phibar = phi0;  // RVI and VI fields, marched in lockstep
    std::vector<double> rhs(static_cast<std::size_t>(nn), 0.0);
    double integral = 0.0;  // trapezoid of e^s phibar(s, 0)
    double prev_weighted = phibar.at_origin();  // e^0 * phibar(0,0)

    DiagnosticReport rep;
    double worst1 = 0.0, worst2 = 0.0;

    auto evaluate = [&](double t) {
        const double po = phi.at_origin(), bo = phibar.at_origin();
        double r1 = 0.0, r2 = 0.0;
        const double envelope = std::exp(-t) * integral;
        for (int node = 0; node < nn; ++node) {
            if (!grid.in_core(node)) continue;
            const double lhs1 = (phi[node] - po) - (phibar[node] - bo);
            r1 = std::max(r1, std::abs(lhs1));
            const double pred = phibar[node] - envelope + beta * (1.0 - std::exp(-t));
            r2 = std::max(r2, std::abs(phi[node] - pred));
        }
        worst1 = std::max(worst1, r1);
        worst2 = std::max(worst2, r2);
    };

    evaluate(0.0);  // both residuals identically zero at t = 0
    for (long step = 0; step < nsteps; ++step) {
        const double offset_rvi = phi.at_origin();
        for (int node = 0; node < nn; ++node)
            rhs[static_cast<std::size_t>(node)] =
                node_game_value(as, phi.values, node) - offset_rvi;
        std::vector<double> rhs_bar(static_cast<std::size_t>(nn), 0.0);
        for (int node = 0; node < nn; ++node)
            rhs_bar[static_cast<std::size_t>(node)] =
                node_game_value(as, phibar.values, node) - beta;
        for (int node = 0; node < nn; ++node) {
            phi.values[static_cast<std::size_t>(node)] += dt * rhs[static_cast<std::size_t>(node)];
            phibar.values[static_cast<std::size_t>(node)] +=
                dt * rhs_bar[static_cast<std::size_t>(node)];
        }
        const double t = (step + 1) * dt;
        const double weighted = std::exp(t) * phibar.at_origin();
        integral += 0.5 * dt * (prev_weighted + weighted);
        prev_weighted = weighted;
        if ((step + 1) % stride == 0 || step == nsteps - 1) evaluate(t);
    }

    rep.details.emplace_back("identity1_max", worst1);
    rep.details.emplace_back("identity2_max", worst2);
    rep.worst = std::max(worst1, worst2);
    rep.pass = rep.worst <= 5e-3;
    std::ostringstream os;
    os << "lemma33: identity1 " << worst1 << ", identity2 " << worst2;
    rep.summary = os.str();
    (void)opts;
    return rep;
}

StrategyField extract_selectors(const GameProblem& problem, const Grid& grid,
                                const ValueField& phi) {
    if (!phi.grid.same_layout(grid)) throw InvalidInput("extract_selectors: grid mismatch");
    const Assembly as = build_assembly(problem, grid);
    StrategyField out(grid, as.m1, as.m2);
    for (int node = 0; node < grid.num_nodes(); ++node) {
        if (grid.boundary == Boundary::dirichlet_zero && grid.is_boundary(node)) continue;
        const GameSolution gs = solve_matrix_game(as.game_matrix(phi.values, node));
        out.v1[static_cast<std::size_t>(node)] = gs.v1;
        out.v2[static_cast<std::size_t>(node)] = gs.v2;
    }
    return out;
}

DiagnosticReport check_contraction(const GameProblem& problem, const Grid& grid,
                                   const ValueField& phi0, const ValueField& phi_star,
                                   double beta, double dt,
                                   const std::vector<double>& checkpoints,
                                   const SolveOptions& opts) {
    if (!problem.lyapunov || problem.lyapunov->mode != LyapunovMode::A3)
        throw ConfigurationError("check_contraction: requires an A3 Lyapunov certificate");
    if (checkpoints.size() < 2)
        throw InvalidInput("check_contraction: need at least two checkpoints");
    const LyapunovCertificate& cert = *problem.lyapunov;

    // March VI once, snapshotting the field at each checkpoint.
    std::vector<ValueField> snaps;
    ValueField phi = phi0;
    double t = 0.0;
    SolveOptions mopts = opts;
    mopts.record_stride = 1 << 20;
    for (double tc : checkpoints) {
        if (tc < t - 1e-12) throw InvalidInput("check_contraction: checkpoints must increase");
        if (tc > t + 1e-12) {
            auto [next, rep] = vi_march(problem, grid, phi, beta, dt, tc - t, mopts);
            phi = next;
            t = tc;
        }
        snaps.push_back(phi);
    }

    DiagnosticReport rep;
    double worst = -1e300;
    for (std::size_t si = 0; si < checkpoints.size(); ++si)
        for (std::size_t ti = si; ti < checkpoints.size(); ++ti) {
            const double s = checkpoints[si], tt = checkpoints[ti];
            // V-norm of phibar(s,.) - phi* over core nodes.
            double vnorm = 0.0;
            for (int node = 0; node < grid.num_nodes(); ++node) {
                if (!grid.in_core(node)) continue;
                const double vx = cert.V(grid.coord(node));
                vnorm = std::max(vnorm, std::abs(snaps[si][node] - phi_star[node]) / vx);
            }
            for (int node = 0; node < grid.num_nodes(); ++node) {
                if (!grid.in_core(node)) continue;
                const double vx = cert.V(grid.coord(node));
                const double lhs = std::abs(snaps[ti][node] - phi_star[node]);
                const double bound =
                    vnorm * (cert.k0 / (2.0 * cert.k1) + vx * std::exp(-2.0 * cert.k1 * (tt - s)));
                worst = std::max(worst, lhs - bound);
            }
        }
    rep.worst = worst;
    rep.pass = worst <= 1e-9;
    rep.details.emplace_back("worst_violation", worst);
    std::ostringstream os;
    os << "contraction bound: worst violation " << worst << " (beta=" << beta << ")";
    rep.summary = os.str();
    return rep;
}

}  // namespace sdg
