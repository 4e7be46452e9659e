#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace sdg {

// State vectors and diffusion matrices are fixed-capacity: dim is 1 or 2,
// only the first `dim` entries are meaningful.
using Vec = std::array<double, 2>;
using Mat = std::array<std::array<double, 2>, 2>;

/// One control value of a single player (a point in that player's control space).
using Control = std::vector<double>;

inline double dot(const Vec& a, const Vec& b, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += a[k] * b[k];
    return s;
}

inline double norm2(const Vec& a, int dim) { return std::sqrt(dot(a, a, dim)); }

inline Mat mat_mul_T(const Mat& s, int dim) {
    // s * s^T
    Mat a{};
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double v = 0.0;
            for (int k = 0; k < dim; ++k) v += s[i][k] * s[j][k];
            a[i][j] = v;
        }
    return a;
}

inline Vec mat_vec(const Mat& m, const Vec& v, int dim) {
    Vec r{};
    for (int i = 0; i < dim; ++i) {
        double s = 0.0;
        for (int k = 0; k < dim; ++k) s += m[i][k] * v[k];
        r[i] = s;
    }
    return r;
}

inline double mat_det(const Mat& m, int dim) {
    if (dim == 1) return m[0][0];
    return m[0][0] * m[1][1] - m[0][1] * m[1][0];
}

inline Mat mat_inv(const Mat& m, int dim) {
    Mat r{};
    if (dim == 1) {
        r[0][0] = 1.0 / m[0][0];
        return r;
    }
    const double d = mat_det(m, 2);
    r[0][0] = m[1][1] / d;
    r[1][1] = m[0][0] / d;
    r[0][1] = -m[0][1] / d;
    r[1][0] = -m[1][0] / d;
    return r;
}

/// Order-independent sum: pairwise reduction fixes the floating-point
/// association regardless of how the inputs were produced.
inline double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_sum(v, 0, v.size());
}

}  // namespace sdg
