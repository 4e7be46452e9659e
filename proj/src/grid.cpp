#include "sdg/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sdg/errors.hpp"

namespace sdg {

Grid::Grid(int dim_, double radius_, int n_, Boundary boundary_, double core_fraction_)
    : dim(dim_), radius(radius_), n(n_), boundary(boundary_), core_fraction(core_fraction_) {
    if (dim != 1 && dim != 2) throw InvalidInput("Grid: dim must be 1 or 2");
    if (n < 3 || n % 2 == 0) throw InvalidInput("Grid: n must be odd and >= 3");
    if (radius <= 0.0) throw InvalidInput("Grid: radius must be positive");
    if (core_fraction <= 0.0 || core_fraction > 1.0)
        throw InvalidInput("Grid: core_fraction must be in (0, 1]");
    spacing = 2.0 * radius / (n - 1);
}

Vec Grid::coord(int idx) const {
    const auto mi = multi_index(idx);
    Vec x{};
    for (int k = 0; k < dim; ++k) x[k] = -radius + spacing * mi[static_cast<std::size_t>(k)];
    return x;
}

int Grid::origin_index() const {
    const int mid = (n - 1) / 2;
    return index(mid, mid);
}

bool Grid::is_boundary(int idx) const {
    const auto mi = multi_index(idx);
    for (int k = 0; k < dim; ++k) {
        const int i = mi[static_cast<std::size_t>(k)];
        if (i == 0 || i == n - 1) return true;
    }
    return false;
}

bool Grid::in_core(int idx) const {
    const Vec x = coord(idx);
    const double r = core_fraction * radius;
    for (int k = 0; k < dim; ++k)
        if (std::abs(x[k]) > r + 1e-12) return false;
    return true;
}

void ValueField::assert_finite(const std::string& context) const {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw DivergenceError(context + ": non-finite value at node " + std::to_string(i));
}

double ValueField::core_sup() const {
    double m = 0.0;
    for (int i = 0; i < grid.num_nodes(); ++i)
        if (grid.in_core(i)) m = std::max(m, std::abs(values[static_cast<std::size_t>(i)]));
    return m;
}

Stencil generator_stencil(const Grid& grid, int node, const Vec& b, const Mat& a) {
    const auto mi = grid.multi_index(node);
    const double h = grid.spacing;
    const int strides[2] = {1, grid.n};
    Stencil st;

    bool at_bdry[2] = {false, false};
    for (int k = 0; k < grid.dim; ++k)
        at_bdry[k] = mi[static_cast<std::size_t>(k)] == 0 ||
                     mi[static_cast<std::size_t>(k)] == grid.n - 1;

    const bool any_bdry = at_bdry[0] || (grid.dim == 2 && at_bdry[1]);
    if (any_bdry && grid.boundary == Boundary::dirichlet_zero)
        throw InvalidInput("generator_stencil: boundary node under dirichlet_zero policy");

    const double cross = grid.dim == 2 ? a[0][1] : 0.0;
    for (int k = 0; k < grid.dim; ++k) {
        const int i = mi[static_cast<std::size_t>(k)];
        const int s = strides[k];
        if (!at_bdry[k]) {
            // Second difference; the |a01| share is carried by the corner points.
            double ck = 0.5 * a[k][k];
            if (grid.dim == 2 && !any_bdry) ck -= 0.5 * std::abs(cross);
            if (ck < -1e-12)
                throw MonotonicityError("generator_stencil: diagonal dominance lost at node " +
                                        std::to_string(node));
            ck = std::max(ck, 0.0) / (h * h);
            st.add(node + s, ck);
            st.add(node - s, ck);
            // Upwind first difference.
            if (b[k] >= 0.0)
                st.add(node + s, b[k] / h);
            else
                st.add(node - s, -b[k] / h);
        } else {
            // one_sided boundary: second difference dropped; the drift term is
            // kept only when its upwind neighbor lies inside the domain.
            if (i == 0 && b[k] >= 0.0)
                st.add(node + s, b[k] / h);
            else if (i == grid.n - 1 && b[k] < 0.0)
                st.add(node - s, -b[k] / h);
        }
    }
    if (grid.dim == 2 && !any_bdry && cross != 0.0) {
        const double w = std::abs(cross) / (2.0 * h * h);
        const int s0 = strides[0], s1 = strides[1];
        if (cross > 0.0) {
            st.add(node + s0 + s1, w);
            st.add(node - s0 - s1, w);
        } else {
            st.add(node + s0 - s1, w);
            st.add(node - s0 + s1, w);
        }
        // Axis neighbors were already reduced by |cross|/2 above; the corner
        // formula also debits the diagonal accordingly via add().
    }
    return st;
}

double apply_generator(const Grid& grid, const GameProblem& problem, const ValueField& f,
                       int node, const Control& u1, const Control& u2) {
    const Vec x = grid.coord(node);
    const Vec b = problem.drift(x, u1, u2);
    const Mat a = problem.diffusion(x);
    return generator_stencil(grid, node, b, a).apply(f.values, node);
}

Matrix hamiltonian_matrix(const Grid& grid, const GameProblem& problem, const ValueField& f,
                          int node) {
    const int m1 = problem.u1.size(), m2 = problem.u2.size();
    Matrix g(m1, m2);
    const Vec x = grid.coord(node);
    for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m2; ++j)
            g(i, j) = apply_generator(grid, problem, f, node, problem.u1.points[i],
                                      problem.u2.points[j]) +
                      problem.payoff(x, problem.u1.points[i], problem.u2.points[j]);
    return g;
}

Matrix Assembly::game_matrix(const std::vector<double>& f, int node) const {
    Matrix g(m1, m2);
    for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m2; ++j)
            g(i, j) = stencil(node, i, j).apply(f, node) + payoff(node, i, j);
    return g;
}

Assembly build_assembly(const GameProblem& problem, const Grid& grid) {
    Assembly as;
    as.grid = grid;
    as.m1 = problem.u1.size();
    as.m2 = problem.u2.size();
    const int nn = grid.num_nodes();
    as.stencils.resize(static_cast<std::size_t>(nn) * as.m1 * as.m2);
    as.payoffs.resize(as.stencils.size());
    double worst = 0.0;
    for (int node = 0; node < nn; ++node) {
        if (grid.boundary == Boundary::dirichlet_zero && grid.is_boundary(node)) continue;
        const Vec x = grid.coord(node);
        const Mat a = problem.diffusion(x);
        if (a[0][0] <= 0.0 || (grid.dim == 2 && a[1][1] <= 0.0))
            throw InvalidInput("build_assembly: diffusion not positive definite at node " +
                               std::to_string(node));
        for (int i = 0; i < as.m1; ++i)
            for (int j = 0; j < as.m2; ++j) {
                const Vec b = problem.drift(x, problem.u1.points[i], problem.u2.points[j]);
                const std::size_t k =
                    static_cast<std::size_t>(node) * (as.m1 * as.m2) + i * as.m2 + j;
                as.stencils[k] = generator_stencil(grid, node, b, a);
                const double hv = problem.payoff(x, problem.u1.points[i], problem.u2.points[j]);
                if (hv < 0.0)
                    throw InvalidInput("build_assembly: negative payoff at node " +
                                       std::to_string(node));
                as.payoffs[k] = hv;
                worst = std::max(worst, as.stencils[k].offdiag_sum());
            }
    }
    // The +1 covers the unit coefficient of the RVI offset term.
    as.cfl_dt = 0.9 / (worst + 1.0);
    return as;
}

void check_scheme(const GameProblem& problem, const Grid& grid) {
    for (int node = 0; node < grid.num_nodes(); ++node) {
        const Vec x = grid.coord(node);
        const Mat a = problem.diffusion(x);
        for (int k = 0; k < grid.dim; ++k) {
            double offsum = 0.0;
            for (int j = 0; j < grid.dim; ++j)
                if (j != k) offsum += std::abs(a[k][j]);
            if (a[k][k] - offsum < -1e-12)
                throw MonotonicityError("check_scheme: a(x) not diagonally dominant at node " +
                                        std::to_string(node));
        }
        if (grid.boundary == Boundary::dirichlet_zero && grid.is_boundary(node)) continue;
        for (const Control& u1 : problem.u1.points)
            for (const Control& u2 : problem.u2.points) {
                const Stencil st = generator_stencil(grid, node, problem.drift(x, u1, u2), a);
                for (int i = 0; i < st.count; ++i)
                    if (st.nb[static_cast<std::size_t>(i)].second < -1e-12)
                        throw MonotonicityError(
                            "check_scheme: negative off-diagonal weight at node " +
                            std::to_string(node));
            }
    }
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

void write_field_csv(const ValueField& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw InvalidInput("write_field_csv: cannot open " + path);
    os << (f.grid.dim == 1 ? "x0,value\n" : "x0,x1,value\n");
    for (int i = 0; i < f.grid.num_nodes(); ++i) {
        const Vec x = f.grid.coord(i);
        for (int k = 0; k < f.grid.dim; ++k) os << format_double(x[k]) << ',';
        os << format_double(f[i]) << '\n';
    }
}

ValueField read_field_csv(const Grid& grid, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidInput("read_field_csv: cannot open " + path);
    std::string line;
    std::getline(is, line);  // header
    ValueField f(grid);
    for (int i = 0; i < grid.num_nodes(); ++i) {
        if (!std::getline(is, line))
            throw InvalidInput("read_field_csv: too few rows in " + path);
        const auto pos = line.rfind(',');
        f[i] = std::stod(line.substr(pos + 1));
    }
    return f;
}

}  // namespace sdg
