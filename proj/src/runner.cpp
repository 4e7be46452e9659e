#include "sdg/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sdg/ergodic.hpp"
#include "sdg/errors.hpp"
#include "sdg/registry.hpp"
#include "sdg/risk.hpp"

namespace sdg {

namespace fs = std::filesystem;

Method parse_method(const std::string& name) {
    if (name == "discounted") return Method::discounted;
    if (name == "vanishing_discount") return Method::vanishing_discount;
    if (name == "vi") return Method::vi;
    if (name == "rvi") return Method::rvi;
    if (name == "risk_game") return Method::risk_game;
    if (name == "risk_multiplicative") return Method::risk_multiplicative;
    if (name == "simulate") return Method::simulate;
    if (name == "check") return Method::check;
    throw InvalidInput("unknown method '" + name + "'");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::discounted: return "discounted";
        case Method::vanishing_discount: return "vanishing_discount";
        case Method::vi: return "vi";
        case Method::rvi: return "rvi";
        case Method::risk_game: return "risk_game";
        case Method::risk_multiplicative: return "risk_multiplicative";
        case Method::simulate: return "simulate";
        case Method::check: return "check";
    }
    throw InvalidInput("unknown method enum");
}

std::vector<double> RunConfig::default_alphas() {
    std::vector<double> a;
    for (int n = 0; n <= 7; ++n) a.push_back(0.5 * std::pow(2.0, -n));
    return a;
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "problem",        "method",          "grid.radius",        "grid.n",
        "grid.boundary",  "grid.core_fraction", "solver.alpha",    "solver.alphas",
        "solver.dt",      "solver.t_end",    "solver.beta",        "solver.residual_tol",
        "solver.record_stride", "sim.dt",    "sim.horizon",        "sim.n_paths",
        "sim.burn_in",    "sim.mode",        "sim.x0",             "seed",
        "output",
    };
    return keys;
}

std::string join_doubles(const std::vector<double>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_double(v[i]);
    return os.str();
}

}  // namespace

RunConfig RunConfig::from_config(const Config& c) {
    for (const auto& [k, _] : c.entries()) {
        if (k.rfind("manifest.", 0) == 0) continue;  // provenance echo, not input
        if (!known_keys().count(k)) throw InvalidInput("config: unknown key '" + k + "'");
    }
    RunConfig r;
    r.problem = c.get("problem");
    r.method = parse_method(c.get("method"));
    r.grid_radius = c.get_double("grid.radius", r.grid_radius);
    r.grid_n = c.get_long("grid.n", r.grid_n);
    r.grid_boundary = c.get("grid.boundary", r.grid_boundary);
    r.core_fraction = c.get_double("grid.core_fraction", r.core_fraction);
    r.alpha = c.get_double("solver.alpha", r.alpha);
    r.alphas = c.has("solver.alphas") ? c.get_doubles("solver.alphas") : default_alphas();
    r.dt = c.get_double("solver.dt", r.dt);
    r.t_end = c.get_double("solver.t_end", r.t_end);
    r.beta_input = c.get_double("solver.beta", r.beta_input);
    r.residual_tol = c.get_double("solver.residual_tol", r.residual_tol);
    r.record_stride = c.get_long("solver.record_stride", r.record_stride);
    r.sim.dt_sim = c.get_double("sim.dt", r.sim.dt_sim);
    r.sim.horizon = c.get_double("sim.horizon", r.sim.horizon);
    r.sim.n_paths = c.get_long("sim.n_paths", r.sim.n_paths);
    r.sim.burn_in = c.get_double("sim.burn_in", r.sim.burn_in);
    const std::string mode = c.get("sim.mode", "sample_pure");
    if (mode == "sample_pure")
        r.sim.mode = StrategyMode::sample_pure;
    else if (mode == "mean_drift")
        r.sim.mode = StrategyMode::mean_drift;
    else
        throw InvalidInput("config: sim.mode must be sample_pure or mean_drift");
    r.sim_x0 = c.get_double("sim.x0", r.sim_x0);
    r.seed = static_cast<std::uint64_t>(c.get_long("seed", 0));
    r.sim.seed = r.seed;
    r.output_dir = c.get("output", "");
    if (r.grid_boundary != "auto" && r.grid_boundary != "dirichlet_zero" &&
        r.grid_boundary != "one_sided")
        throw InvalidInput("config: grid.boundary must be auto, dirichlet_zero, or one_sided");
    return r;
}

Config RunConfig::to_config() const {
    Config c;
    c.set("problem", problem);
    c.set("method", method_name(method));
    c.set_double("grid.radius", grid_radius);
    c.set_long("grid.n", grid_n);
    c.set("grid.boundary", grid_boundary);
    c.set_double("grid.core_fraction", core_fraction);
    c.set_double("solver.alpha", alpha);
    c.set("solver.alphas", join_doubles(alphas.empty() ? default_alphas() : alphas));
    c.set_double("solver.dt", dt);
    c.set_double("solver.t_end", t_end);
    c.set_double("solver.beta", beta_input);
    c.set_double("solver.residual_tol", residual_tol);
    c.set_long("solver.record_stride", record_stride);
    c.set_double("sim.dt", sim.dt_sim);
    c.set_double("sim.horizon", sim.horizon);
    c.set_long("sim.n_paths", sim.n_paths);
    c.set_double("sim.burn_in", sim.burn_in);
    c.set("sim.mode", sim.mode == StrategyMode::sample_pure ? "sample_pure" : "mean_drift");
    c.set_double("sim.x0", sim_x0);
    c.set_long("seed", static_cast<long>(seed));
    if (!output_dir.empty()) c.set("output", output_dir);
    return c;
}

namespace {

struct Artifacts {
    fs::path dir;
    bool enabled = false;

    std::string path(const std::string& name) const { return (dir / name).string(); }
};

Artifacts prepare_output(const RunConfig& cfg) {
    Artifacts a;
    if (cfg.output_dir.empty()) return a;
    a.dir = cfg.output_dir;
    a.enabled = true;
    fs::create_directories(a.dir);
    return a;
}

Boundary resolve_boundary(const RunConfig& cfg) {
    if (cfg.grid_boundary == "dirichlet_zero") return Boundary::dirichlet_zero;
    if (cfg.grid_boundary == "one_sided") return Boundary::one_sided;
    // auto: Dirichlet truncation for discounted pipelines, reflecting-style
    // one-sided differences for the ergodic marches.
    return (cfg.method == Method::discounted || cfg.method == Method::vanishing_discount)
               ? Boundary::dirichlet_zero
               : Boundary::one_sided;
}

void write_manifest(const RunConfig& cfg, const Artifacts& art, double wall_seconds) {
    if (!art.enabled) return;
    Config c = cfg.to_config();
    c.set("output", cfg.output_dir);
    c.set("manifest.schema", "1");
    c.set_double("manifest.wall_seconds", wall_seconds);
    c.write_file(art.path("manifest.cfg"));
}

void write_solution_artifacts(const Artifacts& art, const ErgodicSolution& sol,
                              const std::string& problem_name) {
    if (!art.enabled) return;
    write_report_json(sol.report, sol.beta, problem_name, sol.phi_star.grid,
                      art.path("report.json"));
    write_field_csv(sol.phi_star, art.path("value.csv"));
    if (!sol.selectors.v1.empty()) write_strategy_csv(sol.selectors, art.path("strategy.csv"));
    if (!sol.report.residual_history.empty())
        write_residuals_csv(sol.report, art.path("residuals.csv"));
}

SolveOptions solve_options(const RunConfig& cfg) {
    SolveOptions opts;
    opts.residual_tol = cfg.residual_tol;
    opts.record_stride = static_cast<int>(std::max<long>(1, cfg.record_stride));
    return opts;
}

RunResult run_check(const RunConfig& cfg, const Grid& grid, const Artifacts& art) {
    nlohmann::json j;
    bool pass = true;
    if (is_risk_problem(cfg.problem)) {
        const RiskProblem rp = make_risk_problem(cfg.problem, cfg.grid_radius);
        const GameProblem gp = rp.as_game();
        check_scheme(gp, grid);
        const CertificateReport flat =
            check_flatness(gp, sample_state_pairs(rp.dim, cfg.grid_radius, 9));
        pass = flat.pass;
        const AdversaryBall ball = compute_adversary_ball(rp.flatness);
        j["flatness"] = {{"pass", flat.pass},
                         {"worst_drift_margin", flat.worst_drift_margin},
                         {"worst_constants_margin", flat.worst_payoff_margin},
                         {"summary", flat.summary}};
        j["adversary_ball"] = {{"K", ball.K},
                               {"radius", ball.radius},
                               {"root_residual", ball.root_residual()}};
    } else {
        const GameProblem gp = make_problem(cfg.problem);
        check_scheme(gp, grid);
        if (gp.lyapunov) {
            const CertificateReport lyap =
                check_lyapunov(gp, sample_states(gp.dim, cfg.grid_radius, 41));
            pass = pass && lyap.pass;
            j["lyapunov"] = {{"pass", lyap.pass},
                             {"worst_drift_margin", lyap.worst_drift_margin},
                             {"worst_payoff_margin", lyap.worst_payoff_margin},
                             {"summary", lyap.summary}};
        }
        if (gp.flatness) {
            const CertificateReport flat =
                check_flatness(gp, sample_state_pairs(gp.dim, cfg.grid_radius, 9));
            pass = pass && flat.pass;
            j["flatness"] = {{"pass", flat.pass}, {"summary", flat.summary}};
        }
    }
    j["problem"] = cfg.problem;
    j["scheme_positive_type"] = true;  // check_scheme throws otherwise
    j["pass"] = pass;
    if (art.enabled) {
        std::ofstream os(art.path("check_report.json"));
        os << j.dump(2) << '\n';
    }
    RunResult res;
    res.converged = pass;
    res.exit_code = pass ? 0 : 2;
    res.summary = pass ? "all certificate checks passed" : "certificate check failed";
    return res;
}

RunResult run_simulate(const RunConfig& cfg, const Grid& grid, const Artifacts& art) {
    if (is_risk_problem(cfg.problem))
        throw InvalidInput("simulate: Monte Carlo validation covers game benchmarks only");
    const GameProblem gp = make_problem(cfg.problem);
    const SolveOptions opts = solve_options(cfg);
    const double dt = cfg.dt > 0.0 ? cfg.dt : build_assembly(gp, grid).cfl_dt;
    const ErgodicSolution sol = solve_rvi(gp, grid, dt, cfg.t_end, opts);

    SimConfig sim = cfg.sim;
    sim.seed = cfg.seed;
    const Vec x0{cfg.sim_x0, 0.0};
    const PathEnsembleSummary summary = simulate_paths(gp, sol.selectors, sim, x0);
    RunResult res;
    res.beta = summary.avg_payoff.mean;
    res.converged = sol.report.converged;
    res.exit_code = res.converged ? 0 : 2;
    std::ostringstream os;
    os << "estimated average payoff " << format_double(summary.avg_payoff.mean) << " +/- "
       << format_double(summary.avg_payoff.half_width) << " (solver beta "
       << format_double(sol.beta) << ")";
    res.summary = os.str();
    if (art.enabled) {
        write_trace_csv(summary, art.path("trace.csv"));
        write_estimates_json({{"average_payoff", summary.avg_payoff}}, cfg.problem,
                             art.path("estimates.json"));
        write_solution_artifacts(art, sol, cfg.problem);
    }
    return res;
}

}  // namespace

RunResult run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.problem.empty()) throw InvalidInput("run: no problem selected");
    const Artifacts art = prepare_output(cfg);

    const bool risk = is_risk_problem(cfg.problem);
    const int dim = 1;  // all shipped benchmarks are one-dimensional
    const Grid grid(dim, cfg.grid_radius, static_cast<int>(cfg.grid_n), resolve_boundary(cfg),
                    cfg.core_fraction);
    const SolveOptions opts = solve_options(cfg);

    RunResult res;
    try {
        switch (cfg.method) {
            case Method::check:
                res = run_check(cfg, grid, art);
                break;
            case Method::simulate:
                res = run_simulate(cfg, grid, art);
                break;
            case Method::discounted: {
                if (risk) throw InvalidInput("discounted solve expects a game benchmark");
                const GameProblem gp = make_problem(cfg.problem);
                SolveReport rep;
                auto [psi, strategies] = solve_discounted(gp, grid, cfg.alpha, opts, &rep);
                res.beta = cfg.alpha * psi.at_origin();
                res.converged = rep.converged;
                if (art.enabled) {
                    write_report_json(rep, res.beta, cfg.problem, grid, art.path("report.json"));
                    write_field_csv(psi, art.path("value.csv"));
                    write_strategy_csv(strategies, art.path("strategy.csv"));
                }
                break;
            }
            case Method::vanishing_discount: {
                if (risk) throw InvalidInput("vanishing_discount expects a game benchmark");
                const GameProblem gp = make_problem(cfg.problem);
                const ErgodicSolution sol = vanishing_discount(gp, grid, cfg.alphas, opts);
                res.beta = sol.beta;
                res.converged = sol.report.converged;
                write_solution_artifacts(art, sol, cfg.problem);
                break;
            }
            case Method::vi: {
                if (risk) throw InvalidInput("vi expects a game benchmark");
                const GameProblem gp = make_problem(cfg.problem);
                const double dt = cfg.dt > 0.0 ? cfg.dt : build_assembly(gp, grid).cfl_dt;
                const ValueField phi0(grid, 0.0, FieldTag::parabolic);
                auto [phi, rep] = vi_march(gp, grid, phi0, cfg.beta_input, dt, cfg.t_end, opts);
                res.beta = cfg.beta_input;
                res.converged = rep.converged;
                if (art.enabled) {
                    write_report_json(rep, res.beta, cfg.problem, grid, art.path("report.json"));
                    write_field_csv(phi, art.path("value.csv"));
                    write_residuals_csv(rep, art.path("residuals.csv"));
                }
                break;
            }
            case Method::rvi: {
                if (risk) throw InvalidInput("rvi expects a game benchmark; use risk_game");
                const GameProblem gp = make_problem(cfg.problem);
                const double dt = cfg.dt > 0.0 ? cfg.dt : build_assembly(gp, grid).cfl_dt;
                const ErgodicSolution sol = solve_rvi(gp, grid, dt, cfg.t_end, opts);
                res.beta = sol.beta;
                res.converged = sol.report.converged;
                write_solution_artifacts(art, sol, cfg.problem);
                break;
            }
            case Method::risk_game: {
                if (!risk) throw InvalidInput("risk_game expects a risk benchmark");
                const RiskProblem rp = make_risk_problem(cfg.problem, cfg.grid_radius);
                const double dt =
                    cfg.dt > 0.0
                        ? cfg.dt
                        : risk_cfl_dt(rp, grid, compute_adversary_ball(rp.flatness).radius);
                const ValueField phi0(grid, 0.0, FieldTag::risk);
                const ErgodicSolution sol = solve_risk_game(rp, grid, dt, cfg.t_end, phi0, opts);
                res.beta = sol.beta;
                res.converged = sol.report.converged;
                write_solution_artifacts(art, sol, cfg.problem);
                break;
            }
            case Method::risk_multiplicative: {
                if (!risk) throw InvalidInput("risk_multiplicative expects a risk benchmark");
                const RiskProblem rp = make_risk_problem(cfg.problem, cfg.grid_radius);
                const double dt =
                    cfg.dt > 0.0 ? cfg.dt : build_assembly(rp.as_game(), grid).cfl_dt;
                const ValueField psi0(grid, 1.0, FieldTag::risk);
                auto [psi, rep] = rvi_multiplicative(rp, grid, dt, cfg.t_end, psi0, opts);
                res.beta = std::log(psi.at_origin());
                res.converged = rep.converged;
                if (art.enabled) {
                    write_report_json(rep, res.beta, cfg.problem, grid, art.path("report.json"));
                    write_field_csv(psi, art.path("value.csv"));
                    write_residuals_csv(rep, art.path("residuals.csv"));
                }
                break;
            }
        }
    } catch (const ConvergenceError& e) {
        res.exit_code = 2;
        res.converged = false;
        res.summary = e.what();
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(cfg, art, wall);
        return res;
    }
    if (!res.converged && res.exit_code == 0) res.exit_code = 2;
    if (res.summary.empty()) {
        std::ostringstream os;
        os << method_name(cfg.method) << " on " << cfg.problem << ": beta "
           << format_double(res.beta) << (res.converged ? " (converged)" : " (NOT converged)");
        res.summary = os.str();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(cfg, art, wall);
    return res;
}

RunResult run_from_config(const Config& c) { return run(RunConfig::from_config(c)); }

CompareResult compare(const std::string& dir_a, const std::string& dir_b) {
    auto load = [](const std::string& dir) {
        std::ifstream is(fs::path(dir) / "report.json");
        if (!is) throw InvalidInput("compare: cannot open report.json in " + dir);
        nlohmann::json j;
        is >> j;
        Grid g(j["grid"]["dim"].get<int>(), j["grid"]["radius"].get<double>(),
               j["grid"]["n"].get<int>(),
               j["grid"]["boundary"].get<std::string>() == "dirichlet_zero"
                   ? Boundary::dirichlet_zero
                   : Boundary::one_sided,
               j["grid"]["core_fraction"].get<double>());
        const ValueField f = read_field_csv(g, (fs::path(dir) / "value.csv").string());
        return std::tuple<nlohmann::json, Grid, ValueField>(j, g, f);
    };
    const auto [ja, ga, fa] = load(dir_a);
    const auto [jb, gb, fb] = load(dir_b);
    if (ja["problem"] != jb["problem"])
        throw InvalidInput("compare: reports reference different problems");
    if (!ga.same_layout(gb)) throw InvalidInput("compare: reports use different grids");

    CompareResult out;
    out.dbeta = std::abs(ja["beta"].get<double>() - jb["beta"].get<double>());
    double total = 0.0;
    for (int node = 0; node < ga.num_nodes(); ++node) {
        const double d = std::abs(fa[node] - fb[node]);
        out.max_diff = std::max(out.max_diff, d);
        total += d;
    }
    out.mean_diff = total / ga.num_nodes();
    std::ostringstream os;
    os << "|dbeta| " << format_double(out.dbeta) << ", value field max diff "
       << format_double(out.max_diff) << ", mean diff " << format_double(out.mean_diff);
    out.summary = os.str();
    return out;
}

}  // namespace sdg
