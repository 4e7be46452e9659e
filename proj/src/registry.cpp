#include "sdg/registry.hpp"

#include <cmath>

#include "sdg/errors.hpp"

namespace sdg {

namespace {

const double kSqrt2 = std::sqrt(2.0);

Mat sigma_sqrt2(const Vec&) {
    Mat s{};
    s[0][0] = kSqrt2;
    s[1][1] = kSqrt2;
    return s;
}

/// 1D Ornstein-Uhlenbeck control-free game: b = -x, a = 2, h = x^2.
/// Closed forms: psi_alpha(x) = x^2/(alpha+2) + 2/(alpha (alpha+2)), beta = 1,
/// phi*(x) = x^2/2.
GameProblem make_ou1d() {
    GameProblem p;
    p.dim = 1;
    p.name = "ou1d";
    p.drift = [](const Vec& x, const Control&, const Control&) {
        return Vec{-x[0], 0.0};
    };
    p.sigma = sigma_sqrt2;
    p.payoff = [](const Vec& x, const Control&, const Control&) { return x[0] * x[0]; };
    p.u1 = ControlSet{{Control{0.0}}, 1};
    p.u2 = ControlSet{{Control{0.0}}, 2};
    LyapunovCertificate lyap;
    lyap.V = [](const Vec& x) { return 1.0 + x[0] * x[0]; };
    lyap.k0 = 4.0;
    lyap.k1 = 1.0;
    lyap.k2 = 1.0;
    lyap.mode = LyapunovMode::A3;
    p.lyapunov = lyap;
    return p;
}

/// Two-player OU game: b = -x + u1 - u2 with u_i in {-1/4, +1/4} and
/// h = x^2 + (1 + 4 u1 u2)/4. No closed form; accepted by cross-method
/// agreement and saddle deviation checks.
GameProblem make_ou_game_1d() {
    GameProblem p;
    p.dim = 1;
    p.name = "ou-game-1d";
    p.drift = [](const Vec& x, const Control& u1, const Control& u2) {
        return Vec{-x[0] + u1[0] - u2[0], 0.0};
    };
    p.sigma = sigma_sqrt2;
    p.payoff = [](const Vec& x, const Control& u1, const Control& u2) {
        return x[0] * x[0] + 0.25 * (1.0 + 4.0 * u1[0] * u2[0]);
    };
    p.u1 = ControlSet{{Control{-0.25}, Control{0.25}}, 1};
    p.u2 = ControlSet{{Control{-0.25}, Control{0.25}}, 2};
    LyapunovCertificate lyap;
    lyap.V = [](const Vec& x) { return 1.0 + x[0] * x[0]; };
    lyap.k0 = 4.0;
    lyap.k1 = 0.5;
    lyap.k2 = 2.0;
    lyap.mode = LyapunovMode::A3;
    p.lyapunov = lyap;
    return p;
}

/// Risk-sensitive OU: b = -x, a = 2, h = (3/16) x^2. Eigenpair oracle:
/// psi*(x) = exp(x^2/8), beta = 1/4, phi*(x) = x^2/8.
RiskProblem make_risk_ou_1d(double domain_radius) {
    if (domain_radius <= 0.0)
        throw InvalidInput("risk-ou-1d: domain radius must be positive");
    RiskProblem p;
    p.dim = 1;
    p.name = "risk-ou-1d";
    p.drift = [](const Vec& x, const Control&) { return Vec{-x[0], 0.0}; };
    p.sigma = sigma_sqrt2;
    p.payoff = [](const Vec& x, const Control&) { return 0.1875 * x[0] * x[0]; };
    p.u = ControlSet{{Control{0.0}}, 1};
    FlatnessCertificate cert;
    cert.Q[0][0] = 1.0;
    cert.Q[1][1] = 1.0;
    // c = 1/2 is deliberately below the sharpest valid rate (2): the implied
    // adversary ball R_w = lip_h / c must contain the true maximizer
    // w*(x) = a phi*'(x) = x/2 on the whole box, which needs R_w >= R/2.
    cert.c = 0.5;
    cert.lip_h = 0.375 * domain_radius;  // sup |h'| over the box
    cert.lip_ainv = 0.0;                 // constant diffusion
    cert.sigma_sup = 2.0;
    p.flatness = cert;
    return p;
}

}  // namespace

std::vector<std::string> list_problems() { return {"ou1d", "ou-game-1d", "risk-ou-1d"}; }

bool is_risk_problem(const std::string& name) { return name == "risk-ou-1d"; }

GameProblem make_problem(const std::string& name) {
    if (name == "ou1d") return make_ou1d();
    if (name == "ou-game-1d") return make_ou_game_1d();
    if (is_risk_problem(name))
        throw InvalidInput("make_problem: '" + name + "' is a risk benchmark; use make_risk_problem");
    throw InvalidInput("make_problem: unknown benchmark '" + name + "'");
}

RiskProblem make_risk_problem(const std::string& name, double domain_radius) {
    if (name == "risk-ou-1d") return make_risk_ou_1d(domain_radius);
    throw InvalidInput("make_risk_problem: unknown risk benchmark '" + name + "'");
}

std::vector<Vec> sample_states(int dim, double radius, int per_axis) {
    if (per_axis < 2) throw InvalidInput("sample_states: per_axis must be >= 2");
    std::vector<Vec> out;
    const double h = 2.0 * radius / (per_axis - 1);
    if (dim == 1) {
        for (int i = 0; i < per_axis; ++i) out.push_back(Vec{-radius + i * h, 0.0});
    } else {
        for (int j = 0; j < per_axis; ++j)
            for (int i = 0; i < per_axis; ++i)
                out.push_back(Vec{-radius + i * h, -radius + j * h});
    }
    return out;
}

std::vector<std::pair<Vec, Vec>> sample_state_pairs(int dim, double radius, int per_axis) {
    const std::vector<Vec> pts = sample_states(dim, radius, per_axis);
    std::vector<std::pair<Vec, Vec>> out;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) out.emplace_back(pts[i], pts[j]);
    return out;
}

}  // namespace sdg
