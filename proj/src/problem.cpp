#include "sdg/problem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sdg/errors.hpp"

namespace sdg {

void ControlSet::validate() const {
    if (points.empty()) throw InvalidInput("ControlSet: empty point list");
    if (player != 1 && player != 2) throw InvalidInput("ControlSet: player must be 1 or 2");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j]) throw InvalidInput("ControlSet: duplicate control point");
}

void FlatnessCertificate::validate(int dim) const {
    if (c <= 0.0) throw InvalidInput("FlatnessCertificate: c must be positive");
    if (lip_h < 0.0 || lip_ainv < 0.0 || sigma_sup < 0.0)
        throw InvalidInput("FlatnessCertificate: Lipschitz constants must be nonnegative");
    // Symmetry and positive definiteness of Q.
    if (dim == 2 && std::abs(Q[0][1] - Q[1][0]) > 1e-12)
        throw InvalidInput("FlatnessCertificate: Q not symmetric");
    const double det = mat_det(Q, dim);
    if (Q[0][0] <= 0.0 || det <= 0.0)
        throw InvalidInput("FlatnessCertificate: Q not positive definite");
    if (2.0 * sigma_sup * sigma_sup * lip_h * lip_ainv > c * c * (1.0 + 1e-12))
        throw CertificateViolation("FlatnessCertificate: constants inequality (B3)(ii) fails");
}

void GameProblem::validate() const {
    if (dim != 1 && dim != 2) throw InvalidInput("GameProblem: dim must be 1 or 2");
    if (!drift || !sigma || !payoff) throw InvalidInput("GameProblem: missing coefficient map");
    u1.validate();
    u2.validate();
}

Mat GameProblem::diffusion(const Vec& x) const { return mat_mul_T(sigma(x), dim); }

void MixedStrategy::validate() const {
    double sum = 0.0;
    for (double w : weights) {
        if (w < -1e-12) throw InvalidInput("MixedStrategy: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidInput("MixedStrategy: weights do not sum to 1");
}

MixedStrategy MixedStrategy::point_mass(int size, int index) {
    MixedStrategy s;
    s.weights.assign(static_cast<std::size_t>(size), 0.0);
    s.weights.at(static_cast<std::size_t>(index)) = 1.0;
    return s;
}

MixedStrategy MixedStrategy::uniform(int size) {
    MixedStrategy s;
    s.weights.assign(static_cast<std::size_t>(size), 1.0 / size);
    return s;
}

double relax_payoff(const GameProblem& problem, const Vec& x, const MixedStrategy& v1,
                    const MixedStrategy& v2) {
    if (v1.size() != problem.u1.size() || v2.size() != problem.u2.size())
        throw InvalidInput("relax_payoff: strategy/control-set size mismatch");
    double s = 0.0;
    for (int i = 0; i < v1.size(); ++i) {
        if (v1.weights[i] == 0.0) continue;
        for (int j = 0; j < v2.size(); ++j) {
            if (v2.weights[j] == 0.0) continue;
            s += v1.weights[i] * v2.weights[j] *
                 problem.payoff(x, problem.u1.points[i], problem.u2.points[j]);
        }
    }
    return s;
}

Vec relax_drift(const GameProblem& problem, const Vec& x, const MixedStrategy& v1,
                const MixedStrategy& v2) {
    if (v1.size() != problem.u1.size() || v2.size() != problem.u2.size())
        throw InvalidInput("relax_drift: strategy/control-set size mismatch");
    Vec b{};
    for (int i = 0; i < v1.size(); ++i) {
        if (v1.weights[i] == 0.0) continue;
        for (int j = 0; j < v2.size(); ++j) {
            if (v2.weights[j] == 0.0) continue;
            const Vec bij = problem.drift(x, problem.u1.points[i], problem.u2.points[j]);
            const double w = v1.weights[i] * v2.weights[j];
            for (int k = 0; k < problem.dim; ++k) b[k] += w * bij[k];
        }
    }
    return b;
}

double fd_generator(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& b,
                    const Mat& a, int dim, double step) {
    double out = 0.0;
    const double f0 = f(x);
    for (int k = 0; k < dim; ++k) {
        Vec xp = x, xm = x;
        xp[k] += step;
        xm[k] -= step;
        const double fp = f(xp), fm = f(xm);
        out += b[k] * (fp - fm) / (2.0 * step);
        out += 0.5 * a[k][k] * (fp - 2.0 * f0 + fm) / (step * step);
    }
    if (dim == 2 && a[0][1] != 0.0) {
        Vec xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[0] += step; xpp[1] += step;
        xpm[0] += step; xpm[1] -= step;
        xmp[0] -= step; xmp[1] += step;
        xmm[0] -= step; xmm[1] -= step;
        const double fxy = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * step * step);
        out += a[0][1] * fxy;  // symmetric pair counted once with factor 2 * 1/2
    }
    return out;
}

CertificateReport check_lyapunov(const GameProblem& problem, const std::vector<Vec>& sample,
                                 const CheckOptions& opts) {
    if (!problem.lyapunov)
        throw ConfigurationError("check_lyapunov: problem carries no Lyapunov certificate");
    const LyapunovCertificate& cert = *problem.lyapunov;
    if (cert.mode == LyapunovMode::A3prime && !cert.g)
        throw ConfigurationError("check_lyapunov: mode A3' requires g");

    CertificateReport rep;
    rep.worst_drift_margin = -1e300;
    rep.worst_payoff_margin = -1e300;
    // Shell bookkeeping for the A3' decay trend.
    std::map<int, double> shells;

    for (const Vec& x : sample) {
        const double vx = cert.V(x);
        if (vx < 1.0 - 1e-9)
            throw CertificateViolation("check_lyapunov: V < 1 at a sampled point");
        const double gx = cert.mode == LyapunovMode::A3prime ? cert.g(x) : 0.0;
        if (cert.mode == LyapunovMode::A3prime && gx < 1.0 - 1e-9)
            throw CertificateViolation("check_lyapunov: g < 1 at a sampled point");

        const double step = opts.fd_step_scale * (1.0 + norm2(x, problem.dim));
        const Mat a = problem.diffusion(x);
        const double bound =
            cert.mode == LyapunovMode::A3 ? cert.k0 - 2.0 * cert.k1 * vx : cert.k0 - gx;
        const double tol = opts.abs_tol + opts.rel_tol * (std::abs(bound) + vx);

        double max_h = 0.0;
        for (const Control& u1 : problem.u1.points)
            for (const Control& u2 : problem.u2.points) {
                const Vec b = problem.drift(x, u1, u2);
                const double lv = fd_generator(cert.V, x, b, a, problem.dim, step);
                const double margin = lv - bound;
                if (margin > rep.worst_drift_margin) {
                    rep.worst_drift_margin = margin;
                    rep.worst_drift_point = x;
                }
                if (margin > tol) ++rep.violations;
                max_h = std::max(max_h, problem.payoff(x, u1, u2));
            }

        const double payoff_bound = cert.k2 * (cert.mode == LyapunovMode::A3 ? vx : gx);
        const double pm = max_h - payoff_bound;
        if (pm > rep.worst_payoff_margin) {
            rep.worst_payoff_margin = pm;
            rep.worst_payoff_point = x;
        }
        if (pm > opts.abs_tol + opts.rel_tol * payoff_bound) ++rep.violations;

        if (cert.mode == LyapunovMode::A3prime) {
            const int shell = static_cast<int>(std::floor(norm2(x, problem.dim)));
            double& m = shells[shell];
            m = std::max(m, max_h / gx);
        }
    }

    for (const auto& [shell, ratio] : shells)
        rep.shell_trend.push_back({static_cast<double>(shell), ratio});
    rep.pass = rep.violations == 0;
    std::ostringstream os;
    os << (rep.pass ? "pass" : "FAIL") << ": worst drift margin " << rep.worst_drift_margin
       << ", worst payoff margin " << rep.worst_payoff_margin << ", violations "
       << rep.violations;
    rep.summary = os.str();
    return rep;
}

CertificateReport check_flatness(const GameProblem& problem,
                                 const std::vector<std::pair<Vec, Vec>>& pair_sample,
                                 const CheckOptions& opts) {
    if (!problem.flatness)
        throw ConfigurationError("check_flatness: problem carries no flatness certificate");
    const FlatnessCertificate& cert = *problem.flatness;
    cert.validate(problem.dim);
    const int d = problem.dim;

    CertificateReport rep;
    rep.worst_drift_margin = -1e300;
    rep.worst_payoff_margin =
        2.0 * cert.sigma_sup * cert.sigma_sup * cert.lip_h * cert.lip_ainv - cert.c * cert.c;

    for (const auto& [x, y] : pair_sample) {
        Vec diff{};
        for (int k = 0; k < d; ++k) diff[k] = x[k] - y[k];
        const double dist2 = dot(diff, diff, d);
        if (dist2 == 0.0) {
            ++rep.skipped;  // the condition is stated for x != y
            continue;
        }
        const Vec qd = mat_vec(cert.Q, diff, d);
        const double qform = dot(diff, qd, d);

        const Mat sx = problem.sigma(x), sy = problem.sigma(y);
        Mat ds{};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) ds[i][j] = sx[i][j] - sy[i][j];

        // tr(ds ds^T Q) and ||ds^T Q (x-y)||^2
        double tr_term = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) tr_term += ds[i][k] * ds[j][k] * cert.Q[j][i];
        Vec dstqd{};
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += ds[i][j] * qd[i];
            dstqd[j] = s;
        }
        const double proj_term = dot(dstqd, dstqd, d) / qform;

        for (const Control& u1 : problem.u1.points)
            for (const Control& u2 : problem.u2.points) {
                const Vec bx = problem.drift(x, u1, u2);
                const Vec by = problem.drift(y, u1, u2);
                Vec db{};
                for (int k = 0; k < d; ++k) db[k] = bx[k] - by[k];
                const double lhs = 2.0 * dot(db, qd, d) + tr_term - proj_term;
                const double margin = lhs + cert.c * dist2;
                if (margin > rep.worst_drift_margin) {
                    rep.worst_drift_margin = margin;
                    rep.worst_drift_point = x;
                }
                if (margin > opts.abs_tol + opts.rel_tol * cert.c * dist2) ++rep.violations;
            }
    }

    if (rep.worst_payoff_margin > opts.abs_tol) ++rep.violations;
    rep.pass = rep.violations == 0;
    std::ostringstream os;
    os << (rep.pass ? "pass" : "FAIL") << ": worst (B3)(i) margin " << rep.worst_drift_margin
       << ", (B3)(ii) margin " << rep.worst_payoff_margin << ", skipped pairs " << rep.skipped;
    rep.summary = os.str();
    return rep;
}

}  // namespace sdg
