// Command-line front end: solve, simulate, check, compare, list-problems.
// Exit codes: 0 success/convergence, 2 convergence failure, 1 invalid input.
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sdg/errors.hpp"
#include "sdg/registry.hpp"
#include "sdg/runner.hpp"

namespace {

std::string default_output_dir() {
    const char* env = std::getenv("SDG_OUTPUT_DIR");
    return env ? std::string(env) : std::string();
}

/// Shared solver/grid flags; `method_fixed` pins the method for `simulate`
/// and `check` so a conflicting --method is rejected.
void add_run_flags(CLI::App* cmd, sdg::RunConfig& cfg, std::string& config_path,
                   std::string& method_str, bool allow_method) {
    cmd->add_option("--config", config_path, "key=value config file; flags override it");
    cmd->add_option("--problem", cfg.problem, "registry benchmark name");
    if (allow_method)
        cmd->add_option("--method", method_str,
                        "discounted | vanishing_discount | vi | rvi | risk_game | "
                        "risk_multiplicative");
    cmd->add_option("--radius", cfg.grid_radius, "half-width of the truncation box");
    cmd->add_option("--n", cfg.grid_n, "nodes per axis (odd)");
    cmd->add_option("--boundary", cfg.grid_boundary, "auto | dirichlet_zero | one_sided");
    cmd->add_option("--core-fraction", cfg.core_fraction, "inner fraction for convergence norms");
    cmd->add_option("--alpha", cfg.alpha, "discount factor (discounted method)");
    cmd->add_option("--dt", cfg.dt, "time step; 0 = CFL-stable step");
    cmd->add_option("--t-end", cfg.t_end, "march horizon");
    cmd->add_option("--beta", cfg.beta_input, "ergodic value offset (vi method)");
    cmd->add_option("--residual-tol", cfg.residual_tol, "elliptic residual tolerance");
    cmd->add_option("--seed", cfg.seed, "master RNG seed");
    cmd->add_option("--out", cfg.output_dir, "output directory (default $SDG_OUTPUT_DIR)");
}

/// Rebuilds the RunConfig from an optional config file, then re-applies any
/// explicitly passed flags on top.
sdg::RunConfig resolve_config(const CLI::App* cmd, const sdg::RunConfig& flags,
                              const std::string& config_path, const std::string& method_str,
                              sdg::Method fixed_method, bool has_fixed) {
    sdg::RunConfig cfg = flags;
    if (!config_path.empty()) {
        sdg::Config file = sdg::Config::parse_file(config_path);
        // Flags act as overrides: write them into the parsed file config.
        sdg::RunConfig base = sdg::RunConfig::from_config(file);
        auto passed = [cmd](const std::string& flag) { return cmd->count(flag) > 0; };
        if (passed("--problem")) base.problem = flags.problem;
        if (passed("--radius")) base.grid_radius = flags.grid_radius;
        if (passed("--n")) base.grid_n = flags.grid_n;
        if (passed("--boundary")) base.grid_boundary = flags.grid_boundary;
        if (passed("--core-fraction")) base.core_fraction = flags.core_fraction;
        if (passed("--alpha")) base.alpha = flags.alpha;
        if (passed("--dt")) base.dt = flags.dt;
        if (passed("--t-end")) base.t_end = flags.t_end;
        if (passed("--beta")) base.beta_input = flags.beta_input;
        if (passed("--residual-tol")) base.residual_tol = flags.residual_tol;
        if (passed("--seed")) { base.seed = flags.seed; base.sim.seed = flags.seed; }
        if (passed("--out")) base.output_dir = flags.output_dir;
        cfg = base;
    }
    if (has_fixed) {
        cfg.method = fixed_method;
    } else if (!method_str.empty()) {
        cfg.method = sdg::parse_method(method_str);
    }
    if (cfg.output_dir.empty()) cfg.output_dir = default_output_dir();
    return cfg;
}

int execute(const sdg::RunConfig& cfg) {
    const sdg::RunResult res = sdg::run(cfg);
    std::cout << res.summary << '\n';
    if (!cfg.output_dir.empty()) std::cout << "artifacts: " << cfg.output_dir << '\n';
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ergodic stochastic differential game solver"};
    app.require_subcommand(1);

    sdg::RunConfig solve_cfg, sim_cfg, check_cfg;
    std::string solve_config_path, sim_config_path, check_config_path;
    std::string solve_method;
    std::string unused_method;

    CLI::App* solve = app.add_subcommand("solve", "run a PDE solve and write artifacts");
    add_run_flags(solve, solve_cfg, solve_config_path, solve_method, true);

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo run under extracted selectors");
    add_run_flags(simulate, sim_cfg, sim_config_path, unused_method, false);
    simulate->add_option("--sim-dt", sim_cfg.sim.dt_sim, "Euler-Maruyama step");
    simulate->add_option("--horizon", sim_cfg.sim.horizon, "simulation horizon");
    simulate->add_option("--paths", sim_cfg.sim.n_paths, "number of paths");
    simulate->add_option("--burn-in", sim_cfg.sim.burn_in, "burn-in fraction");
    simulate->add_option("--x0", sim_cfg.sim_x0, "initial state (first coordinate)");

    CLI::App* check = app.add_subcommand("check", "audit certificates and scheme monotonicity");
    add_run_flags(check, check_cfg, check_config_path, unused_method, false);

    std::string cmp_a, cmp_b;
    CLI::App* cmp = app.add_subcommand("compare", "diff two run directories");
    cmp->add_option("dir_a", cmp_a, "first run directory")->required();
    cmp->add_option("dir_b", cmp_b, "second run directory")->required();

    app.add_subcommand("list-problems", "print the benchmark registry");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors are invalid input
    }

    try {
        if (app.got_subcommand("list-problems")) {
            for (const std::string& name : sdg::list_problems()) std::cout << name << '\n';
            return 0;
        }
        if (app.got_subcommand(cmp)) {
            const sdg::CompareResult res = sdg::compare(cmp_a, cmp_b);
            std::cout << res.summary << '\n';
            return 0;
        }
        if (app.got_subcommand(solve)) {
            if (solve_method.empty() && solve_config_path.empty())
                throw sdg::InvalidInput("solve: --method or --config required");
            return execute(resolve_config(solve, solve_cfg, solve_config_path, solve_method,
                                          sdg::Method::rvi, false));
        }
        if (app.got_subcommand(simulate)) {
            sdg::RunConfig cfg = resolve_config(simulate, sim_cfg, sim_config_path, "",
                                                sdg::Method::simulate, true);
            if (simulate->count("--sim-dt")) cfg.sim.dt_sim = sim_cfg.sim.dt_sim;
            if (simulate->count("--horizon")) cfg.sim.horizon = sim_cfg.sim.horizon;
            if (simulate->count("--paths")) cfg.sim.n_paths = sim_cfg.sim.n_paths;
            if (simulate->count("--burn-in")) cfg.sim.burn_in = sim_cfg.sim.burn_in;
            if (simulate->count("--x0")) cfg.sim_x0 = sim_cfg.sim_x0;
            return execute(cfg);
        }
        if (app.got_subcommand(check))
            return execute(
                resolve_config(check, check_cfg, check_config_path, "", sdg::Method::check, true));
    } catch (const sdg::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
