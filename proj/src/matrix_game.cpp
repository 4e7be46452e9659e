#include "sdg/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdg/errors.hpp"

namespace sdg {

namespace {

constexpr double kPivotEps = 1e-11;

void best_response_bounds(const Matrix& G, const MixedStrategy& v1, const MixedStrategy& v2,
                          double& row_best, double& col_best) {
    row_best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < G.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < G.cols; ++j) s += G(i, j) * v2.weights[static_cast<std::size_t>(j)];
        row_best = std::max(row_best, s);
    }
    col_best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < G.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < G.rows; ++i) s += G(i, j) * v1.weights[static_cast<std::size_t>(i)];
        col_best = std::min(col_best, s);
    }
}

double duality_gap(const Matrix& G, const MixedStrategy& v1, const MixedStrategy& v2) {
    double rb, cb;
    best_response_bounds(G, v1, v2, rb, cb);
    return std::max(rb - cb, 0.0);
}

// Pure-strategy saddle scan: maxmin == minmax over pure strategies.
bool pure_saddle(const Matrix& G, GameSolution& out) {
    int best_i = 0;
    double maxmin = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < G.rows; ++i) {
        double rmin = std::numeric_limits<double>::infinity();
        for (int j = 0; j < G.cols; ++j) rmin = std::min(rmin, G(i, j));
        if (rmin > maxmin) {
            maxmin = rmin;
            best_i = i;
        }
    }
    int best_j = 0;
    double minmax = std::numeric_limits<double>::infinity();
    for (int j = 0; j < G.cols; ++j) {
        double cmax = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < G.rows; ++i) cmax = std::max(cmax, G(i, j));
        if (cmax < minmax) {
            minmax = cmax;
            best_j = j;
        }
    }
    if (maxmin != minmax) return false;
    out.value = maxmin;
    out.v1 = MixedStrategy::point_mass(G.rows, best_i);
    out.v2 = MixedStrategy::point_mass(G.cols, best_j);
    out.gap = duality_gap(G, out.v1, out.v2);
    return true;
}

}  // namespace

GameSolution solve_matrix_game(const Matrix& G) {
    if (G.rows < 1 || G.cols < 1) throw InvalidInput("solve_matrix_game: empty matrix");
    for (double v : G.a)
        if (!std::isfinite(v)) throw InvalidInput("solve_matrix_game: non-finite entry");

    GameSolution out;
    if (pure_saddle(G, out)) return out;

    // Shift so every entry is >= 1, then solve the value LP
    //   maximize sum(y)  s.t.  G' y <= 1, y >= 0
    // whose optimum gives value = 1/sum(y), v2 = y/sum(y), and the duals on
    // the slack columns give v1.
    double lo = G.a[0];
    for (double v : G.a) lo = std::min(lo, v);
    const double shift = 1.0 - lo;

    const int m = G.rows, n = G.cols;
    const int cols = n + m + 1;
    std::vector<std::vector<double>> T(static_cast<std::size_t>(m + 1),
                                       std::vector<double>(static_cast<std::size_t>(cols), 0.0));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) T[i][j] = G(i, j) + shift;
        T[i][n + i] = 1.0;
        T[i][cols - 1] = 1.0;
    }
    for (int j = 0; j < n; ++j) T[m][j] = -1.0;  // objective row of max sum(y)

    std::vector<int> basis(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

    // Bland's rule: smallest eligible entering column; ratio ties broken by
    // smallest basis variable index. Guarantees termination on degenerate games.
    for (;;) {
        int enter = -1;
        for (int j = 0; j < n + m; ++j)
            if (T[m][j] < -kPivotEps) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        int leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            if (T[i][enter] <= kPivotEps) continue;
            const double ratio = T[i][cols - 1] / T[i][enter];
            if (ratio < best_ratio - 1e-15 ||
                (std::abs(ratio - best_ratio) <= 1e-15 && leave >= 0 &&
                 basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                best_ratio = ratio;
                leave = i;
            }
        }
        if (leave < 0) throw ConvergenceError("solve_matrix_game: LP unbounded");
        const double piv = T[leave][enter];
        for (int j = 0; j < cols; ++j) T[leave][j] /= piv;
        for (int i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = T[i][enter];
            if (f == 0.0) continue;
            for (int j = 0; j < cols; ++j) T[i][j] -= f * T[leave][j];
        }
        basis[static_cast<std::size_t>(leave)] = enter;
    }

    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < m; ++i)
        if (basis[static_cast<std::size_t>(i)] < n)
            y[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] = T[i][cols - 1];
    double ysum = 0.0;
    for (double v : y) ysum += v;
    std::vector<double> p(static_cast<std::size_t>(m), 0.0);
    double psum = 0.0;
    for (int i = 0; i < m; ++i) {
        p[static_cast<std::size_t>(i)] = std::max(T[m][n + i], 0.0);
        psum += p[static_cast<std::size_t>(i)];
    }
    if (ysum <= 0.0 || psum <= 0.0)
        throw ConvergenceError("solve_matrix_game: degenerate LP optimum");

    out.value = 1.0 / ysum - shift;
    out.v2.weights.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) out.v2.weights[static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(j)] / ysum;
    out.v1.weights.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) out.v1.weights[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)] / psum;
    out.gap = duality_gap(G, out.v1, out.v2);
    return out;
}

GameSolution fictitious_play(const Matrix& G, long iters) {
    if (iters < 1) throw InvalidInput("fictitious_play: iters must be >= 1");
    for (double v : G.a)
        if (!std::isfinite(v)) throw InvalidInput("fictitious_play: non-finite entry");
    const int m = G.rows, n = G.cols;
    std::vector<double> row_acc(static_cast<std::size_t>(m), 0.0);  // G * (opponent counts)
    std::vector<double> col_acc(static_cast<std::size_t>(n), 0.0);
    std::vector<long> row_count(static_cast<std::size_t>(m), 0);
    std::vector<long> col_count(static_cast<std::size_t>(n), 0);

    int i_play = 0, j_play = 0;
    for (long t = 0; t < iters; ++t) {
        ++row_count[static_cast<std::size_t>(i_play)];
        ++col_count[static_cast<std::size_t>(j_play)];
        for (int i = 0; i < m; ++i) row_acc[static_cast<std::size_t>(i)] += G(i, j_play);
        for (int j = 0; j < n; ++j) col_acc[static_cast<std::size_t>(j)] += G(i_play, j);
        i_play = 0;
        for (int i = 1; i < m; ++i)
            if (row_acc[static_cast<std::size_t>(i)] > row_acc[static_cast<std::size_t>(i_play)]) i_play = i;
        j_play = 0;
        for (int j = 1; j < n; ++j)
            if (col_acc[static_cast<std::size_t>(j)] < col_acc[static_cast<std::size_t>(j_play)]) j_play = j;
    }

    GameSolution out;
    out.v1.weights.resize(static_cast<std::size_t>(m));
    out.v2.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < m; ++i)
        out.v1.weights[static_cast<std::size_t>(i)] =
            static_cast<double>(row_count[static_cast<std::size_t>(i)]) / static_cast<double>(iters);
    for (int j = 0; j < n; ++j)
        out.v2.weights[static_cast<std::size_t>(j)] =
            static_cast<double>(col_count[static_cast<std::size_t>(j)]) / static_cast<double>(iters);
    double rb, cb;
    best_response_bounds(G, out.v1, out.v2, rb, cb);
    out.value = 0.5 * (rb + cb);
    out.gap = std::max(rb - cb, 0.0);
    return out;
}

}  // namespace sdg
