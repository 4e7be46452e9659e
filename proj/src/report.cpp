#include "sdg/report.hpp"

#include <fstream>

#include "json.hpp"
#include "sdg/errors.hpp"

namespace sdg {

double SolveReport::get(const std::string& key, double fallback) const {
    for (const auto& [k, v] : diagnostics)
        if (k == key) return v;
    return fallback;
}

StrategyField::StrategyField(const Grid& g, int m1, int m2) : grid(g) {
    v1.assign(static_cast<std::size_t>(g.num_nodes()), MixedStrategy::uniform(m1));
    v2.assign(static_cast<std::size_t>(g.num_nodes()), MixedStrategy::uniform(m2));
}

void write_report_json(const SolveReport& rep, double beta, const std::string& problem_name,
                       const Grid& grid, const std::string& path) {
    nlohmann::json j;
    j["method"] = rep.method;
    j["problem"] = problem_name;
    j["beta"] = beta;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    j["wall_seconds"] = rep.wall_seconds;
    j["grid"] = {{"dim", grid.dim},
                 {"radius", grid.radius},
                 {"n", grid.n},
                 {"spacing", grid.spacing},
                 {"boundary", grid.boundary == Boundary::dirichlet_zero ? "dirichlet_zero"
                                                                        : "one_sided"},
                 {"core_fraction", grid.core_fraction}};
    nlohmann::json diag = nlohmann::json::object();
    for (const auto& [k, v] : rep.diagnostics) diag[k] = v;
    j["diagnostics"] = diag;
    if (!rep.residual_history.empty())
        j["final_residual"] = rep.residual_history.back().residual;
    std::ofstream os(path);
    if (!os) throw InvalidInput("write_report_json: cannot open " + path);
    os << j.dump(2) << '\n';
}

void write_residuals_csv(const SolveReport& rep, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw InvalidInput("write_residuals_csv: cannot open " + path);
    os << "step,time,residual,offset\n";
    for (const ResidualSample& r : rep.residual_history)
        os << r.step << ',' << format_double(r.time) << ',' << format_double(r.residual) << ','
           << format_double(r.offset) << '\n';
}

void write_strategy_csv(const StrategyField& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw InvalidInput("write_strategy_csv: cannot open " + path);
    const int m1 = s.v1.empty() ? 0 : s.v1.front().size();
    const int m2 = s.v2.empty() ? 0 : s.v2.front().size();
    for (int k = 0; k < s.grid.dim; ++k) os << "x" << k << ',';
    for (int i = 0; i < m1; ++i) os << "p1_" << i << ',';
    for (int j = 0; j < m2; ++j) os << "p2_" << j << (j + 1 < m2 ? "," : "");
    os << '\n';
    for (int node = 0; node < s.grid.num_nodes(); ++node) {
        const Vec x = s.grid.coord(node);
        for (int k = 0; k < s.grid.dim; ++k) os << format_double(x[k]) << ',';
        const auto& w1 = s.v1[static_cast<std::size_t>(node)].weights;
        const auto& w2 = s.v2[static_cast<std::size_t>(node)].weights;
        for (double w : w1) os << format_double(w) << ',';
        for (std::size_t j = 0; j < w2.size(); ++j)
            os << format_double(w2[j]) << (j + 1 < w2.size() ? "," : "");
        os << '\n';
    }
}

}  // namespace sdg
