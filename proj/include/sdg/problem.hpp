#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdg/types.hpp"

namespace sdg {

/// Finite discretization of one player's compact control set.
struct ControlSet {
    std::vector<Control> points;
    int player = 1;  // 1 or 2

    void validate() const;
    int size() const { return static_cast<int>(points.size()); }
};

enum class LyapunovMode { A3, A3prime };

/// Foster-Lyapunov data: V with drift constants (k0, k1, k2), either in the
/// geometric form  LV <= k0 - 2 k1 V  or the g-norm form  LV <= k0 - g.
struct LyapunovCertificate {
    std::function<double(const Vec&)> V;
    double k0 = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    LyapunovMode mode = LyapunovMode::A3;
    std::function<double(const Vec&)> g;  // required iff mode == A3prime
};

/// Asymptotic flatness data: contraction matrix Q, rate c, and the Lipschitz
/// constants entering the adversary-ball bound.
struct FlatnessCertificate {
    Mat Q{};
    double c = 0.0;
    double lip_h = 0.0;
    double lip_ainv = 0.0;
    double sigma_sup = 0.0;  // sup-norm of sigma sigma^T

    void validate(int dim) const;
};

using DriftFn = std::function<Vec(const Vec&, const Control&, const Control&)>;
using SigmaFn = std::function<Mat(const Vec&)>;
using PayoffFn = std::function<double(const Vec&, const Control&, const Control&)>;

/// A zero-sum stochastic differential game instance:
///   dX = b(X,u1,u2) dt + sigma(X) dW,   running payoff h(X,u1,u2) >= 0,
/// player 1 maximizes the long-run average, player 2 minimizes it.
struct GameProblem {
    int dim = 1;
    DriftFn drift;
    SigmaFn sigma;
    PayoffFn payoff;
    ControlSet u1;
    ControlSet u2;
    std::optional<LyapunovCertificate> lyapunov;
    std::optional<FlatnessCertificate> flatness;
    std::string name;  // registry tag when built from the registry

    void validate() const;
    /// a(x) = sigma(x) sigma(x)^T
    Mat diffusion(const Vec& x) const;
};

struct MixedStrategy {
    std::vector<double> weights;

    void validate() const;
    int size() const { return static_cast<int>(weights.size()); }
    static MixedStrategy point_mass(int size, int index);
    static MixedStrategy uniform(int size);
};

/// Bilinear average of the pure payoff under a pair of mixed strategies.
double relax_payoff(const GameProblem& problem, const Vec& x, const MixedStrategy& v1,
                    const MixedStrategy& v2);

/// Drift averaged under a pair of mixed strategies (affine in each argument).
Vec relax_drift(const GameProblem& problem, const Vec& x, const MixedStrategy& v1,
                const MixedStrategy& v2);

struct ShellTrendEntry {
    double shell_radius = 0.0;
    double max_ratio = 0.0;  // max over shell of (max_u h) / g
};

struct CertificateReport {
    bool pass = false;
    // Worst margin of the drift inequality, LHS - RHS; <= tolerance means pass.
    double worst_drift_margin = 0.0;
    Vec worst_drift_point{};
    // Worst margin of the payoff bound.
    double worst_payoff_margin = 0.0;
    Vec worst_payoff_point{};
    int violations = 0;
    int skipped = 0;
    std::vector<ShellTrendEntry> shell_trend;  // A3' decay diagnostic
    std::string summary;
};

struct CheckOptions {
    double fd_step_scale = 1e-4;  // step = scale * (1 + |x|)
    double abs_tol = 1e-8;
    double rel_tol = 1e-6;
};

/// Audits the Lyapunov drift and payoff-growth inequalities on a sample of
/// states, over every pure control pair. A pass is evidence, not proof.
CertificateReport check_lyapunov(const GameProblem& problem, const std::vector<Vec>& sample,
                                 const CheckOptions& opts = {});

/// Audits the flatness inequality on a sample of state pairs (three-term left
/// side evaluated verbatim) and the constants inequality from the certificate.
CertificateReport check_flatness(const GameProblem& problem,
                                 const std::vector<std::pair<Vec, Vec>>& pair_sample,
                                 const CheckOptions& opts = {});

/// Centered finite-difference generator applied to a scalar callable; used by
/// the certificate sweeps so analytic derivatives of V are never required.
double fd_generator(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& b,
                    const Mat& a, int dim, double step);

}  // namespace sdg
