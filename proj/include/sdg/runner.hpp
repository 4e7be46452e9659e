#pragma once

#include <string>
#include <vector>

#include "sdg/config.hpp"
#include "sdg/sim.hpp"

namespace sdg {

enum class Method {
    discounted,
    vanishing_discount,
    vi,
    rvi,
    risk_game,
    risk_multiplicative,
    simulate,
    check,
};

Method parse_method(const std::string& name);
std::string method_name(Method m);

/// One reproducible invocation: problem + grid + solver/sim numerics + output
/// location. Field defaults are the desk-scale benchmark settings.
struct RunConfig {
    std::string problem;
    Method method = Method::rvi;

    double grid_radius = 6.0;
    long grid_n = 241;
    std::string grid_boundary = "auto";  // auto | dirichlet_zero | one_sided
    double core_fraction = 0.8;

    double alpha = 0.5;                 // discounted solve
    std::vector<double> alphas;         // vanishing-discount schedule; empty = default
    double dt = 0.0;                    // 0 = CFL-stable step
    double t_end = 20.0;
    double beta_input = 0.0;            // value-iteration offset
    double residual_tol = 0.1;
    long record_stride = 10;

    SimConfig sim;
    double sim_x0 = 1.5;

    std::uint64_t seed = 0;
    std::string output_dir;  // empty = no artifacts written

    /// Parses and validates; unknown keys (outside manifest.*) are rejected.
    static RunConfig from_config(const Config& c);
    /// Normalized echo: parses back to an equivalent RunConfig.
    Config to_config() const;
    /// Default vanishing-discount schedule 0.5 * 2^{-n}, n = 0..7.
    static std::vector<double> default_alphas();
};

struct RunResult {
    int exit_code = 0;  // 0 converged, 2 convergence failure
    bool converged = true;
    double beta = 0.0;
    std::string summary;
};

/// Executes the selected pipeline and writes artifacts (manifest.cfg,
/// report.json, value.csv, strategy.csv, residuals.csv, trace.csv,
/// estimates.json, check_report.json as applicable) into output_dir.
/// Throws InvalidInput for bad configuration (CLI exit 1).
RunResult run(const RunConfig& config);

/// Convenience: parse + run (the manifest round-trip entry point).
RunResult run_from_config(const Config& c);

struct CompareResult {
    double dbeta = 0.0;
    double max_diff = 0.0;   // nodewise sup difference of the value fields
    double mean_diff = 0.0;  // nodewise mean absolute difference
    std::string summary;
};

/// Diffs two run directories (report.json + value.csv each); mismatched
/// problem or grid throws InvalidInput.
CompareResult compare(const std::string& dir_a, const std::string& dir_b);

}  // namespace sdg
