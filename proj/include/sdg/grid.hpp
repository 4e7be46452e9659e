#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "sdg/problem.hpp"
#include "sdg/types.hpp"

namespace sdg {

enum class Boundary { dirichlet_zero, one_sided };

/// Truncated rectangular grid covering [-radius, radius]^dim with n points per
/// axis. n is odd so the origin is exactly a node (normalizations pin values
/// there). Node ordering is row-major with axis 0 fastest.
struct Grid {
    int dim = 1;
    double radius = 0.0;
    int n = 0;
    double spacing = 0.0;
    Boundary boundary = Boundary::one_sided;
    double core_fraction = 0.8;

    Grid() = default;
    Grid(int dim, double radius, int n, Boundary boundary, double core_fraction = 0.8);

    int num_nodes() const { return dim == 1 ? n : n * n; }
    int index(int i0, int i1 = 0) const { return dim == 1 ? i0 : i0 + n * i1; }
    std::array<int, 2> multi_index(int idx) const {
        return dim == 1 ? std::array<int, 2>{idx, 0} : std::array<int, 2>{idx % n, idx / n};
    }
    Vec coord(int idx) const;
    int origin_index() const;
    bool is_boundary(int idx) const;
    /// Core region: the inner core_fraction of the box, where convergence
    /// norms are measured (boundary layers excluded).
    bool in_core(int idx) const;
    bool same_layout(const Grid& other) const {
        return dim == other.dim && n == other.n && radius == other.radius;
    }
};

enum class FieldTag { discounted, parabolic, ergodic, risk };

/// Scalar field on a grid.
struct ValueField {
    Grid grid;
    std::vector<double> values;
    FieldTag tag = FieldTag::ergodic;
    double tag_param = 0.0;  // alpha for discounted, t for parabolic

    ValueField() = default;
    explicit ValueField(const Grid& g, double fill = 0.0, FieldTag tag = FieldTag::ergodic)
        : grid(g), values(static_cast<std::size_t>(g.num_nodes()), fill), tag(tag) {}

    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
    double at_origin() const { return values[static_cast<std::size_t>(grid.origin_index())]; }
    void assert_finite(const std::string& context) const;
    /// Maximum absolute value over core nodes.
    double core_sup() const;
};

/// Discrete generator stencil at one node: L f = diag * f(node) + sum w_i f(nb_i).
/// Off-diagonal weights are nonnegative by construction (positive-type scheme).
struct Stencil {
    double diag = 0.0;
    int count = 0;
    std::array<std::pair<int, double>, 8> nb{};

    void add(int node, double w) {
        nb[static_cast<std::size_t>(count++)] = {node, w};
        diag -= w;
    }
    double offdiag_sum() const {
        double s = 0.0;
        for (int i = 0; i < count; ++i) s += nb[static_cast<std::size_t>(i)].second;
        return s;
    }
    double apply(const std::vector<double>& f, int node) const {
        double s = diag * f[static_cast<std::size_t>(node)];
        for (int i = 0; i < count; ++i) {
            const auto& [j, w] = nb[static_cast<std::size_t>(i)];
            s += w * f[static_cast<std::size_t>(j)];
        }
        return s;
    }
};

/// Upwind/centered monotone stencil of the generator with drift b and
/// diffusion a at the given node. Throws MonotonicityError if a negative
/// off-diagonal weight appears (cross terms beyond diagonal dominance).
Stencil generator_stencil(const Grid& grid, int node, const Vec& b, const Mat& a);

/// Discrete L f(x, u1, u2) at a node via the monotone stencil.
double apply_generator(const Grid& grid, const GameProblem& problem, const ValueField& f,
                       int node, const Control& u1, const Control& u2);

/// Small dense matrix for the per-node games, row = player 1 control.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

/// G[i][j] = L f(x, u1_i, u2_j) + hbar(x, u1_i, u2_j).
Matrix hamiltonian_matrix(const Grid& grid, const GameProblem& problem, const ValueField& f,
                          int node);

/// Precomputed stencils and payoffs for every (node, control pair); the
/// coefficients depend only on the grid and problem, not on the field.
struct Assembly {
    Grid grid;
    int m1 = 0;
    int m2 = 0;
    std::vector<Stencil> stencils;  // node-major, then i * m2 + j
    std::vector<double> payoffs;
    double cfl_dt = 0.0;  // 0.9 / max(sum off-diagonals + 1)

    const Stencil& stencil(int node, int i, int j) const {
        return stencils[static_cast<std::size_t>(node) * (m1 * m2) + i * m2 + j];
    }
    double payoff(int node, int i, int j) const {
        return payoffs[static_cast<std::size_t>(node) * (m1 * m2) + i * m2 + j];
    }
    Matrix game_matrix(const std::vector<double>& f, int node) const;
};

Assembly build_assembly(const GameProblem& problem, const Grid& grid);

/// Verifies diagonal dominance of a(x) at every node (the 2D cross-stencil
/// validity condition) and positive-type weights for every control pair.
void check_scheme(const GameProblem& problem, const Grid& grid);

/// CSV export: node coordinates then value, row-major, axis 0 fastest,
/// shortest round-trip float formatting.
void write_field_csv(const ValueField& f, const std::string& path);
ValueField read_field_csv(const Grid& grid, const std::string& path);

std::string format_double(double v);

}  // namespace sdg
