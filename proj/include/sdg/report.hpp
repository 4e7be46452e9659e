#pragma once

#include <string>
#include <vector>

#include "sdg/grid.hpp"
#include "sdg/problem.hpp"

namespace sdg {

struct ResidualSample {
    long step = 0;
    double time = 0.0;
    double residual = 0.0;
    double offset = 0.0;  // beta or the origin value, per method
};

/// Solver provenance and convergence diagnostics attached to every solve.
struct SolveReport {
    std::string method;
    long iterations = 0;
    bool converged = false;
    double wall_seconds = 0.0;
    std::vector<ResidualSample> residual_history;
    // Free-form named diagnostics (trend tables, truncation deltas, constants).
    std::vector<std::pair<std::string, double>> diagnostics;

    void add(const std::string& key, double value) { diagnostics.emplace_back(key, value); }
    double get(const std::string& key, double fallback = 0.0) const;
};

/// Per-node mixed strategies for both players.
struct StrategyField {
    Grid grid;
    std::vector<MixedStrategy> v1;
    std::vector<MixedStrategy> v2;

    StrategyField() = default;
    StrategyField(const Grid& g, int m1, int m2);
};

struct ErgodicSolution {
    double beta = 0.0;
    ValueField phi_star;  // normalized phi_star(0) = 0
    StrategyField selectors;
    SolveReport report;
};

struct DiagnosticReport {
    bool pass = false;
    double worst = 0.0;  // worst residual / violation margin
    std::vector<std::pair<std::string, double>> details;
    std::string summary;
};

void write_report_json(const SolveReport& rep, double beta, const std::string& problem_name,
                       const Grid& grid, const std::string& path);
void write_residuals_csv(const SolveReport& rep, const std::string& path);
void write_strategy_csv(const StrategyField& s, const std::string& path);

}  // namespace sdg
