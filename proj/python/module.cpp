#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sdg/config.hpp"
#include "sdg/ergodic.hpp"
#include "sdg/errors.hpp"
#include "sdg/grid.hpp"
#include "sdg/matrix_game.hpp"
#include "sdg/registry.hpp"
#include "sdg/risk.hpp"
#include "sdg/runner.hpp"
#include "sdg/sim.hpp"

namespace py = pybind11;
using namespace sdg;

namespace {

std::vector<double> grid_coords(const Grid& g) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(g.num_nodes()));
    for (int i = 0; i < g.num_nodes(); ++i) out.push_back(g.coord(i)[0]);
    return out;
}

Boundary parse_boundary(const std::string& name) {
    if (name == "dirichlet_zero") return Boundary::dirichlet_zero;
    if (name == "one_sided") return Boundary::one_sided;
    throw InvalidInput("unknown boundary: " + name);
}

py::dict solution_dict(const ErgodicSolution& sol) {
    py::dict d;
    d["beta"] = sol.beta;
    d["phi_star"] = sol.phi_star.values;
    py::list v1, v2;
    for (const auto& m : sol.selectors.v1) v1.append(m.weights);
    for (const auto& m : sol.selectors.v2) v2.append(m.weights);
    d["v1"] = v1;
    d["v2"] = v2;
    py::dict diag;
    for (const auto& [k, v] : sol.report.diagnostics) diag[py::str(k)] = v;
    d["diagnostics"] = diag;
    return d;
}

py::dict estimate_dict(const PayoffEstimate& e) {
    py::dict d;
    d["mean"] = e.mean;
    d["half_width"] = e.half_width;
    d["n_effective"] = e.n_effective;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Solvers for zero-sum ergodic stochastic differential games";

    py::register_exception<InvalidInput>(m, "InvalidInputError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceFailure", PyExc_RuntimeError);

    py::class_<Grid>(m, "Grid")
        .def(py::init([](int dim, double radius, int n, const std::string& boundary) {
                 return Grid(dim, radius, n, parse_boundary(boundary));
             }),
             py::arg("dim"), py::arg("radius"), py::arg("n"), py::arg("boundary") = "one_sided")
        .def_readonly("dim", &Grid::dim)
        .def_readonly("radius", &Grid::radius)
        .def_readonly("n", &Grid::n)
        .def_readonly("spacing", &Grid::spacing)
        .def("num_nodes", &Grid::num_nodes)
        .def("coords", &grid_coords);

    m.def("list_problems", &list_problems);
    m.def("is_risk_problem", &is_risk_problem, py::arg("name"));

    m.def(
        "solve_rvi",
        [](const std::string& problem, const Grid& grid, double dt, double t_end) {
            return solution_dict(solve_rvi(make_problem(problem), grid, dt, t_end));
        },
        py::arg("problem"), py::arg("grid"), py::arg("dt") = 0.0, py::arg("t_end") = 20.0,
        "Relative value iteration for a registered game benchmark; dt = 0 "
        "selects the CFL-stable step.");

    m.def(
        "vanishing_discount",
        [](const std::string& problem, const Grid& grid, const std::vector<double>& alphas) {
            const auto& schedule = alphas.empty() ? RunConfig::default_alphas() : alphas;
            return solution_dict(vanishing_discount(make_problem(problem), grid, schedule));
        },
        py::arg("problem"), py::arg("grid"), py::arg("alphas") = std::vector<double>{},
        "Vanishing-discount extraction of the ergodic value and bias.");

    m.def(
        "solve_risk",
        [](const std::string& problem, const Grid& grid, double t_end) {
            const RiskProblem p = make_risk_problem(problem, grid.radius);
            const AdversaryBall ball = compute_adversary_ball(p.flatness);
            const double dt = risk_cfl_dt(p, grid, ball.radius);
            return solution_dict(solve_risk_game(p, grid, dt, t_end, ValueField(grid)));
        },
        py::arg("problem"), py::arg("grid"), py::arg("t_end") = 20.0,
        "Risk-sensitive value and bias via the transformed game.");

    m.def(
        "solve_matrix_game",
        [](const std::vector<std::vector<double>>& entries) {
            if (entries.empty() || entries.front().empty())
                throw InvalidInput("solve_matrix_game: empty matrix");
            Matrix G(static_cast<int>(entries.size()), static_cast<int>(entries.front().size()));
            for (int i = 0; i < G.rows; ++i) {
                if (static_cast<int>(entries[static_cast<std::size_t>(i)].size()) != G.cols)
                    throw InvalidInput("solve_matrix_game: ragged matrix");
                for (int j = 0; j < G.cols; ++j)
                    G(i, j) = entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
            const GameSolution s = solve_matrix_game(G);
            py::dict d;
            d["value"] = s.value;
            d["v1"] = s.v1.weights;
            d["v2"] = s.v2.weights;
            d["gap"] = s.gap;
            return d;
        },
        py::arg("matrix"), "Value and optimal mixed strategies of a zero-sum matrix game.");

    m.def(
        "estimate_beta",
        [](const std::string& problem, const Grid& grid, double x0, double dt, double horizon,
           long n_paths, std::uint64_t seed) {
            const GameProblem p = make_problem(problem);
            const ErgodicSolution sol = solve_rvi(p, grid, 0.0, horizon);
            SimConfig c;
            c.dt_sim = dt;
            c.horizon = horizon;
            c.n_paths = n_paths;
            c.seed = seed;
            return estimate_dict(estimate_beta(p, sol.selectors, c, Vec{x0, 0.0}));
        },
        py::arg("problem"), py::arg("grid"), py::arg("x0") = 0.0, py::arg("dt") = 1e-3,
        py::arg("horizon") = 10.0, py::arg("n_paths") = 1000, py::arg("seed") = 0,
        "Monte Carlo long-run average payoff under the extracted saddle strategies.");

    m.def(
        "run_config",
        [](const std::string& text) {
            const RunResult r = run_from_config(Config::parse_string(text));
            py::dict d;
            d["exit_code"] = r.exit_code;
            d["converged"] = r.converged;
            d["beta"] = r.beta;
            d["summary"] = r.summary;
            return d;
        },
        py::arg("config_text"), "Execute a flat key=value run configuration.");
}
