#pragma once

#include <cmath>

#include "sdg/problem.hpp"

namespace sdg::testing {

/// Control-free 1D problem with drift b(x), constant sigma, payoff h(x).
inline GameProblem scalar_problem(double (*b)(double), double sigma_const, double (*h)(double)) {
    GameProblem p;
    p.dim = 1;
    p.drift = [b](const Vec& x, const Control&, const Control&) { return Vec{b(x[0]), 0.0}; };
    p.sigma = [sigma_const](const Vec&) {
        Mat s{};
        s[0][0] = sigma_const;
        s[1][1] = sigma_const;
        return s;
    };
    p.payoff = [h](const Vec& x, const Control&, const Control&) { return h(x[0]); };
    p.u1 = ControlSet{{Control{0.0}}, 1};
    p.u2 = ControlSet{{Control{0.0}}, 2};
    return p;
}

/// The default vanishing-discount schedule 0.5 * 2^{-n}, n = 0..7.
inline std::vector<double> default_alphas() {
    std::vector<double> a;
    for (int n = 0; n <= 7; ++n) a.push_back(0.5 * std::pow(2.0, -n));
    return a;
}

inline double neg_x(double x) { return -x; }
inline double x_squared(double x) { return x * x; }
inline double zero_fn(double) { return 0.0; }

}  // namespace sdg::testing
