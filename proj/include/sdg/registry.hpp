#pragma once

#include <string>
#include <vector>

#include "sdg/problem.hpp"
#include "sdg/risk.hpp"

namespace sdg {

/// Registry names of the shipped benchmarks, solver ones first.
std::vector<std::string> list_problems();

/// True if the name refers to a risk-sensitive (single-player) benchmark.
bool is_risk_problem(const std::string& name);

/// Builds a game benchmark by registry name; throws InvalidInput for unknown
/// names (including risk names, which go through make_risk_problem).
GameProblem make_problem(const std::string& name);

/// Builds a risk benchmark. The payoff Lipschitz constant in the flatness
/// certificate is taken over the truncation box, so the domain radius is part
/// of the construction.
RiskProblem make_risk_problem(const std::string& name, double domain_radius);

/// Uniform lattice of sample states in [-radius, radius]^dim for the
/// certificate sweeps.
std::vector<Vec> sample_states(int dim, double radius, int per_axis);

/// All ordered pairs of distinct sample states (flatness checks).
std::vector<std::pair<Vec, Vec>> sample_state_pairs(int dim, double radius, int per_axis);

}  // namespace sdg
