#include "sdg/risk.hpp"

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
}  // namespace

void RiskProblem::validate() const {
    if (dim != 1 && dim != 2) throw InvalidInput("RiskProblem: dim must be 1 or 2");
    if (!drift || !sigma || !payoff) throw InvalidInput("RiskProblem: missing coefficient map");
    u.validate();
    flatness.validate(dim);
}

GameProblem RiskProblem::as_game() const {
    GameProblem g;
    g.dim = dim;
    g.name = name;
    const RiskDriftFn b = drift;
    const RiskPayoffFn h = payoff;
    g.drift = [b](const Vec& x, const Control& u1, const Control&) { return b(x, u1); };
    g.sigma = sigma;
    g.payoff = [h](const Vec& x, const Control& u1, const Control&) { return h(x, u1); };
    g.u1 = u;
    g.u1.player = 1;
    g.u2 = ControlSet{{Control{}}, 2};  // dummy opponent
    g.flatness = flatness;
    return g;
}

AdversaryBall compute_adversary_ball(const FlatnessCertificate& cert) {
    if (2.0 * cert.sigma_sup * cert.sigma_sup * cert.lip_h * cert.lip_ainv >
        cert.c * cert.c * (1.0 + 1e-12))
        throw CertificateViolation("compute_adversary_ball: (B3)(ii) fails");
    AdversaryBall ball;
    ball.quad_a = 0.5 * std::sqrt(cert.c) * cert.sigma_sup * cert.lip_ainv;
    ball.quad_b = std::pow(cert.c, 1.25);
    ball.quad_c = cert.lip_h * cert.sigma_sup;
    if (ball.quad_a == 0.0) {
        ball.K = ball.quad_c / ball.quad_b;  // linear fallback
    } else {
        const double disc = ball.quad_b * ball.quad_b - 4.0 * ball.quad_a * ball.quad_c;
        if (disc < 0.0)
            throw CertificateViolation(
                "compute_adversary_ball: negative discriminant ((B3)(ii) failed numerically)");
        ball.K = (ball.quad_b - std::sqrt(disc)) / (2.0 * ball.quad_a);
    }
    ball.radius = cert.lip_h / cert.c + cert.lip_ainv * ball.K * ball.K / (2.0 * std::sqrt(cert.c));
    return ball;
}

namespace {

// Upwind gradient per the sign of the combined drift d; one-sided boundary
// rule matches generator_stencil (outward upwind directions are dropped).
Vec upwind_gradient(const Grid& grid, const std::vector<double>& f, int node, const Vec& d) {
    const auto mi = grid.multi_index(node);
    const double h = grid.spacing;
    const int strides[2] = {1, grid.n};
    Vec p{};
    for (int k = 0; k < grid.dim; ++k) {
        const int i = mi[static_cast<std::size_t>(k)];
        const int s = strides[k];
        const double f0 = f[static_cast<std::size_t>(node)];
        if (d[k] >= 0.0) {
            if (i < grid.n - 1) p[k] = (f[static_cast<std::size_t>(node + s)] - f0) / h;
        } else {
            if (i > 0) p[k] = (f0 - f[static_cast<std::size_t>(node - s)]) / h;
        }
    }
    return p;
}

struct RiskEval {
    RiskHamiltonianValue out;
    bool upwind_resolved = true;
};

RiskEval eval_risk_hamiltonian(const Grid& grid, const std::vector<double>& f, int node,
                               const RiskProblem& problem, const AdversaryBall& ball) {
    const Vec x = grid.coord(node);
    const Mat a = problem.diffusion(x);
    if (mat_det(a, problem.dim) <= 0.0)
        throw InvalidInput("risk_hamiltonian: singular diffusion at node " + std::to_string(node));
    const Mat ainv = mat_inv(a, problem.dim);

    RiskEval ev;
    double best = 1e300;
    // At boundary nodes the one-sided stencil drops the diffusion term, and
    // the adversary quadratic is exactly the transform of that term, so the
    // adversary is dropped with it (keeps the log-domain and multiplicative
    // marches consistent at the truncation edge).
    const bool no_adversary = grid.is_boundary(node);
    for (int vi = 0; vi < problem.u.size(); ++vi) {
        const Control& v = problem.u.points[static_cast<std::size_t>(vi)];
        const Vec b = problem.drift(x, v);
        Vec w{};
        bool resolved = no_adversary;
        for (int pass = 0; pass < (no_adversary ? 0 : 3); ++pass) {
            Vec d{};
            for (int k = 0; k < problem.dim; ++k) d[k] = b[k] + w[k];
            const Vec p = upwind_gradient(grid, f, node, d);
            Vec wn = mat_vec(a, p, problem.dim);
            const double wl = norm2(wn, problem.dim);
            if (wl > ball.radius && wl > 0.0) {
                const double scale = ball.radius / wl;  // radial projection
                for (int k = 0; k < problem.dim; ++k) wn[k] *= scale;
            }
            double change = 0.0;
            for (int k = 0; k < problem.dim; ++k) change = std::max(change, std::abs(wn[k] - w[k]));
            w = wn;
            if (change <= 1e-13) {
                resolved = true;
                break;
            }
        }
        Vec d{};
        for (int k = 0; k < problem.dim; ++k) d[k] = b[k] + w[k];
        const Stencil st = generator_stencil(grid, node, d, a);
        const Vec aiw = mat_vec(ainv, w, problem.dim);
        const double value =
            st.apply(f, node) + problem.payoff(x, v) - 0.5 * dot(w, aiw, problem.dim);
        if (value < best) {
            best = value;
            ev.out.value = value;
            ev.out.control_index = vi;
            ev.out.w = w;
        }
        if (!resolved) ev.upwind_resolved = false;
    }
    return ev;
}

}  // namespace

double risk_cfl_dt(const RiskProblem& problem, const Grid& grid, double ball_radius) {
    double worst = 0.0;
    for (int node = 0; node < grid.num_nodes(); ++node) {
        const Vec x = grid.coord(node);
        const Mat a = problem.diffusion(x);
        for (const Control& v : problem.u.points) {
            const Vec b = problem.drift(x, v);
            double s = 0.0;
            for (int k = 0; k < grid.dim; ++k)
                s += a[k][k] / (grid.spacing * grid.spacing) +
                     (std::abs(b[k]) + ball_radius) / grid.spacing;
            worst = std::max(worst, s);
        }
    }
    return 0.9 / (worst + 1.0);
}

RiskHamiltonianValue risk_hamiltonian(const Grid& grid, const ValueField& f, int node,
                                      const RiskProblem& problem, const AdversaryBall& ball) {
    return eval_risk_hamiltonian(grid, f.values, node, problem, ball).out;
}

ErgodicSolution solve_risk_game(const RiskProblem& problem, const Grid& grid, double dt,
                                double t_end, const ValueField& phi0, const SolveOptions& opts) {
    problem.validate();
    if (dt <= 0.0 || t_end <= 0.0)
        throw InvalidInput("solve_risk_game: dt and t_end must be positive");
    const auto t0 = Clock::now();
    const AdversaryBall ball = compute_adversary_ball(problem.flatness);
    const double cfl = risk_cfl_dt(problem, grid, ball.radius);
    if (dt > cfl * (1.0 + 1e-12))
        throw InvalidInput("solve_risk_game: dt violates the CFL bound " + std::to_string(cfl));

    const long nsteps = static_cast<long>(std::llround(t_end / dt));
    const int nn = grid.num_nodes();
    ValueField phi = phi0;
    phi.tag = FieldTag::risk;
    std::vector<double> rhs(static_cast<std::size_t>(nn), 0.0);
    std::vector<double> origin_trace;
    origin_trace.reserve(static_cast<std::size_t>(nsteps) + 1);
    long unresolved = 0;

    ErgodicSolution sol;
    sol.report.method = "risk_game_rvi";
    for (long step = 0; step < nsteps; ++step) {
        const double offset = phi.at_origin();
        origin_trace.push_back(offset);
        for (int node = 0; node < nn; ++node) {
            const RiskEval ev = eval_risk_hamiltonian(grid, phi.values, node, problem, ball);
            if (!ev.upwind_resolved) ++unresolved;
            rhs[static_cast<std::size_t>(node)] = ev.out.value - offset;
        }
        double change = 0.0;
        for (int node = 0; node < nn; ++node) {
            const double d = dt * rhs[static_cast<std::size_t>(node)];
            phi.values[static_cast<std::size_t>(node)] += d;
            if (grid.in_core(node)) change = std::max(change, std::abs(d));
        }
        if (step % opts.record_stride == 0 || step == nsteps - 1)
            sol.report.residual_history.push_back({step, (step + 1) * dt, change / dt, offset});
        if (step % 200 == 0 && !std::isfinite(phi.at_origin()))
            throw DivergenceError("solve_risk_game: NaN at step " + std::to_string(step));
    }
    origin_trace.push_back(phi.at_origin());
    phi.assert_finite("solve_risk_game");

    {
        const std::size_t n = origin_trace.size();
        const std::size_t start =
            n - std::max<std::size_t>(1, static_cast<std::size_t>(opts.beta_avg_fraction * n));
        std::vector<double> tail(origin_trace.begin() + static_cast<std::ptrdiff_t>(start),
                                 origin_trace.end());
        sol.beta = pairwise_sum(tail) / static_cast<double>(tail.size());
    }
    sol.phi_star = phi;
    const double p0 = phi.at_origin();
    for (double& v : sol.phi_star.values) v -= p0;

    // Minimizing selector (point mass per node) from the limit field.
    sol.selectors = StrategyField(grid, problem.u.size(), 1);
    double resid = 0.0;
    bool isotropic = true;
    for (int node = 0; node < nn; ++node) {
        const RiskEval ev = eval_risk_hamiltonian(grid, sol.phi_star.values, node, problem, ball);
        sol.selectors.v1[static_cast<std::size_t>(node)] =
            MixedStrategy::point_mass(problem.u.size(), ev.out.control_index);
        if (grid.in_core(node)) resid = std::max(resid, std::abs(ev.out.value - sol.beta));
        const Mat a = problem.diffusion(grid.coord(node));
        if (std::abs(a[0][1]) > 1e-14 ||
            (grid.dim == 2 && std::abs(a[0][0] - a[1][1]) > 1e-12 * std::abs(a[0][0])))
            isotropic = false;
    }
    sol.report.iterations = nsteps;
    sol.report.add("beta_risk", sol.beta);
    sol.report.add("elliptic_residual_core", resid);
    sol.report.add("adversary_K", ball.K);
    sol.report.add("adversary_radius", ball.radius);
    sol.report.add("adversary_quad_a", ball.quad_a);
    sol.report.add("adversary_quad_b", ball.quad_b);
    sol.report.add("adversary_quad_c", ball.quad_c);
    sol.report.add("root_residual", ball.root_residual());
    sol.report.add("upwind_unresolved_evals", static_cast<double>(unresolved));
    sol.report.add("radial_projection_exact", isotropic ? 1.0 : 0.0);
    sol.report.add("lip_h_truncated", problem.flatness.lip_h);
    sol.report.converged = resid <= opts.residual_tol;
    sol.report.wall_seconds = seconds_since(t0);
    return sol;
}

std::pair<ValueField, SolveReport> rvi_multiplicative(const RiskProblem& problem, const Grid& grid,
                                                      double dt, double t_end,
                                                      const ValueField& psi0,
                                                      const SolveOptions& opts) {
    problem.validate();
    if (dt <= 0.0 || t_end <= 0.0)
        throw InvalidInput("rvi_multiplicative: dt and t_end must be positive");
    for (double v : psi0.values)
        if (!(v > 0.0)) throw InvalidInput("rvi_multiplicative: psi0 must be positive nodewise");
    if (!std::isfinite(psi0.at_origin()))
        throw InvalidInput("rvi_multiplicative: psi0(origin) must be finite");
    const auto t0 = Clock::now();

    // Per-control generator stencils for the plain (no adversary) operator.
    const GameProblem g = problem.as_game();
    const Assembly as = build_assembly(g, grid);
    if (dt > as.cfl_dt * (1.0 + 1e-12))
        throw InvalidInput("rvi_multiplicative: dt violates the CFL bound " +
                           std::to_string(as.cfl_dt));

    const long nsteps = static_cast<long>(std::llround(t_end / dt));
    const int nn = grid.num_nodes();
    ValueField psi = psi0;
    psi.tag = FieldTag::risk;
    std::vector<double> rhs(static_cast<std::size_t>(nn), 0.0);

    SolveReport rep;
    rep.method = "risk_rvi_multiplicative";
    for (long step = 0; step < nsteps; ++step) {
        const double log_origin = std::log(psi.at_origin());
        for (int node = 0; node < nn; ++node) {
            const double pv = psi.values[static_cast<std::size_t>(node)];
            double best = 1e300;
            for (int vi = 0; vi < as.m1; ++vi)
                best = std::min(best, as.stencil(node, vi, 0).apply(psi.values, node) +
                                          (as.payoff(node, vi, 0) - log_origin) * pv);
            rhs[static_cast<std::size_t>(node)] = best;
        }
        double change = 0.0;
        double minval = 1e300;
        for (int node = 0; node < nn; ++node) {
            double& pv = psi.values[static_cast<std::size_t>(node)];
            const double d = dt * rhs[static_cast<std::size_t>(node)];
            pv += d;
            minval = std::min(minval, pv);
            if (grid.in_core(node)) change = std::max(change, std::abs(d));
        }
        if (!(minval > 0.0))
            throw DivergenceError(
                "rvi_multiplicative: positivity lost at step " + std::to_string(step) +
                "; reduce dt or use the log-domain path");
        if (step % opts.record_stride == 0 || step == nsteps - 1)
            rep.residual_history.push_back({step, (step + 1) * dt, change / dt, log_origin});
    }
    psi.assert_finite("rvi_multiplicative");
    rep.iterations = nsteps;
    rep.add("beta_risk", std::log(psi.at_origin()));
    rep.converged = true;
    rep.wall_seconds = seconds_since(t0);
    return {psi, rep};
}

}  // namespace sdg
