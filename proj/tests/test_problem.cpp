#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sdg/errors.hpp"
#include "sdg/problem.hpp"
#include "sdg/registry.hpp"

using namespace sdg;

namespace {

GameProblem sign_game() {
    // h(x, u1, u2) = u1 * u2 on {-1, 1}^2.
    GameProblem p = testing::scalar_problem(testing::neg_x, std::sqrt(2.0), testing::zero_fn);
    p.payoff = [](const Vec&, const Control& u1, const Control& u2) { return u1[0] * u2[0]; };
    p.u1 = ControlSet{{Control{-1.0}, Control{1.0}}, 1};
    p.u2 = ControlSet{{Control{-1.0}, Control{1.0}}, 2};
    return p;
}

}  // namespace

TEST_CASE("control set and strategy validation") {
    ControlSet empty{{}, 1};
    CHECK_THROWS_AS(empty.validate(), InvalidInput);
    ControlSet dup{{Control{1.0}, Control{1.0}}, 1};
    CHECK_THROWS_AS(dup.validate(), InvalidInput);
    ControlSet bad_player{{Control{1.0}}, 3};
    CHECK_THROWS_AS(bad_player.validate(), InvalidInput);
    ControlSet ok{{Control{0.0}, Control{1.0}}, 2};
    CHECK_NOTHROW(ok.validate());

    MixedStrategy neg{{-0.1, 1.1}};
    CHECK_THROWS_AS(neg.validate(), InvalidInput);
    MixedStrategy unnormalized{{0.5, 0.4}};
    CHECK_THROWS_AS(unnormalized.validate(), InvalidInput);
    CHECK_NOTHROW(MixedStrategy::uniform(3).validate());
    CHECK(MixedStrategy::point_mass(4, 2).weights[2] == 1.0);
}

TEST_CASE("relax_payoff on constant payoff is the constant") {
    GameProblem p = sign_game();
    p.payoff = [](const Vec&, const Control&, const Control&) { return 5.0; };
    const Vec x{0.3, 0.0};
    CHECK(relax_payoff(p, x, MixedStrategy::uniform(2), MixedStrategy::uniform(2)) ==
          doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("relax_payoff point masses recover the pure payoff") {
    const GameProblem p = sign_game();
    const Vec x{0.0, 0.0};
    CHECK(relax_payoff(p, x, MixedStrategy::point_mass(2, 0), MixedStrategy::point_mass(2, 1)) ==
          doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(relax_payoff(p, x, MixedStrategy::point_mass(2, 1), MixedStrategy::point_mass(2, 1)) ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("relax_payoff of the product game under uniform mixing is zero") {
    const GameProblem p = sign_game();
    const Vec x{0.0, 0.0};
    CHECK(std::abs(relax_payoff(p, x, MixedStrategy::uniform(2), MixedStrategy::uniform(2))) <
          1e-14);
}

TEST_CASE("relax_payoff is bilinear in each strategy argument") {
    const GameProblem p = sign_game();
    const Vec x{0.7, 0.0};
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double lam = u(rng);
        const double a0 = u(rng);
        const double b0 = u(rng);
        MixedStrategy v{{a0, 1.0 - a0}}, vp{{b0, 1.0 - b0}};
        MixedStrategy mixed{{lam * a0 + (1 - lam) * b0, lam * (1 - a0) + (1 - lam) * (1 - b0)}};
        const MixedStrategy w = MixedStrategy::uniform(2);
        const double lhs = relax_payoff(p, x, mixed, w);
        const double rhs = lam * relax_payoff(p, x, v, w) + (1 - lam) * relax_payoff(p, x, vp, w);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("relax_payoff rejects mismatched strategy sizes") {
    const GameProblem p = sign_game();
    CHECK_THROWS_AS(
        relax_payoff(p, Vec{0.0, 0.0}, MixedStrategy::uniform(3), MixedStrategy::uniform(2)),
        InvalidInput);
}

TEST_CASE("relax_drift averages the drift affinely") {
    GameProblem p = sign_game();
    p.drift = [](const Vec& x, const Control& u1, const Control& u2) {
        return Vec{-x[0] + u1[0] - u2[0], 0.0};
    };
    const Vec x{1.0, 0.0};
    MixedStrategy v1{{0.25, 0.75}};  // mean control 0.5
    MixedStrategy v2{{0.75, 0.25}};  // mean control -0.5
    const Vec b = relax_drift(p, x, v1, v2);
    CHECK(b[0] == doctest::Approx(-1.0 + 0.5 + 0.5).epsilon(1e-14));
}

TEST_CASE("Lyapunov certificate of the OU benchmark passes with near-zero margin") {
    const GameProblem p = make_problem("ou1d");
    const CertificateReport rep = check_lyapunov(p, sample_states(1, 6.0, 41));
    CHECK(rep.pass);
    // L V = 2 - 2 x^2 equals the bound 4 - 2 V exactly.
    CHECK(std::abs(rep.worst_drift_margin) < 1e-5);
}

TEST_CASE("Lyapunov check fails when k0 is tightened to 1") {
    GameProblem p = make_problem("ou1d");
    p.lyapunov->k0 = 1.0;
    const CertificateReport rep = check_lyapunov(p, sample_states(1, 6.0, 21));
    CHECK_FALSE(rep.pass);
    // At x = 0: L V = 2 but the bound reads 1 - 2 = -1.
    CHECK(rep.worst_drift_margin > 2.9);
}

TEST_CASE("payoff bound passes trivially for zero payoff") {
    GameProblem p = make_problem("ou1d");
    p.payoff = [](const Vec&, const Control&, const Control&) { return 0.0; };
    const CertificateReport rep = check_lyapunov(p, sample_states(1, 6.0, 21));
    CHECK(rep.pass);
    CHECK(rep.worst_payoff_margin <= 0.0);
}

TEST_CASE("Lyapunov check is monotone in k0") {
    GameProblem p = make_problem("ou1d");
    const auto sample = sample_states(1, 6.0, 21);
    REQUIRE(check_lyapunov(p, sample).pass);
    p.lyapunov->k0 += 3.0;
    CHECK(check_lyapunov(p, sample).pass);
}

TEST_CASE("missing certificates raise configuration errors") {
    GameProblem p = testing::scalar_problem(testing::neg_x, 1.0, testing::zero_fn);
    CHECK_THROWS_AS(check_lyapunov(p, sample_states(1, 2.0, 5)), ConfigurationError);
    CHECK_THROWS_AS(check_flatness(p, sample_state_pairs(1, 2.0, 5)), ConfigurationError);
}

TEST_CASE("flatness holds for contracting drift with constant sigma") {
    // b = -x + u, sigma constant: the sigma-difference terms vanish and the
    // left side is -2 (x-y)^2, so c = 2 passes.
    GameProblem p = testing::scalar_problem(testing::neg_x, std::sqrt(2.0), testing::x_squared);
    p.drift = [](const Vec& x, const Control& u1, const Control&) {
        return Vec{-x[0] + u1[0], 0.0};
    };
    p.u1 = ControlSet{{Control{-1.0}, Control{1.0}}, 1};
    FlatnessCertificate cert;
    cert.Q[0][0] = 1.0;
    cert.Q[1][1] = 1.0;
    cert.c = 2.0;
    cert.lip_h = 1.0;
    cert.lip_ainv = 0.0;
    cert.sigma_sup = 2.0;
    p.flatness = cert;
    const CertificateReport rep = check_flatness(p, sample_state_pairs(1, 3.0, 9));
    CHECK(rep.pass);
    CHECK(rep.worst_drift_margin < 1e-10);
    // (B3)(ii) left side is exactly zero when lip_ainv = 0.
    CHECK(rep.worst_payoff_margin < 0.0);
}

TEST_CASE("flatness fails for constant (non-contracting) drift") {
    GameProblem p = testing::scalar_problem(testing::neg_x, 1.0, testing::zero_fn);
    p.drift = [](const Vec&, const Control& u1, const Control&) { return Vec{u1[0], 0.0}; };
    FlatnessCertificate cert;
    cert.Q[0][0] = 1.0;
    cert.Q[1][1] = 1.0;
    cert.c = 0.1;
    cert.sigma_sup = 1.0;
    p.flatness = cert;
    const CertificateReport rep = check_flatness(p, sample_state_pairs(1, 2.0, 7));
    CHECK_FALSE(rep.pass);  // LHS = 0 > -c ||x-y||^2 for every pair
}

TEST_CASE("identical state pairs are skipped, not counted as violations") {
    GameProblem p = make_problem("ou1d");
    FlatnessCertificate cert;
    cert.Q[0][0] = 1.0;
    cert.Q[1][1] = 1.0;
    cert.c = 1.0;
    cert.sigma_sup = 2.0;
    p.flatness = cert;
    std::vector<std::pair<Vec, Vec>> pairs = {{Vec{1.0, 0.0}, Vec{1.0, 0.0}},
                                              {Vec{0.0, 0.0}, Vec{1.0, 0.0}}};
    const CertificateReport rep = check_flatness(p, pairs);
    CHECK(rep.skipped == 1);
    CHECK(rep.pass);
}

TEST_CASE("fd_generator matches the analytic generator on a 2D quadratic") {
    // f = x^2 + 3 x y + 2 y^2, b = (1, -2), a = [[2, 0.5], [0.5, 1]]:
    // L f = b . grad f + a_11 + (3/2) a_12 ... computed by hand below.
    const auto f = [](const Vec& x) {
        return x[0] * x[0] + 3.0 * x[0] * x[1] + 2.0 * x[1] * x[1];
    };
    const Vec x{0.4, -0.7};
    const Vec b{1.0, -2.0};
    Mat a{};
    a[0][0] = 2.0; a[0][1] = 0.5; a[1][0] = 0.5; a[1][1] = 1.0;
    const double grad0 = 2.0 * x[0] + 3.0 * x[1];
    const double grad1 = 3.0 * x[0] + 4.0 * x[1];
    const double exact = b[0] * grad0 + b[1] * grad1 + 0.5 * (a[0][0] * 2.0 + a[1][1] * 4.0) +
                         a[0][1] * 3.0;
    CHECK(fd_generator(f, x, b, a, 2, 1e-4) == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("problem validation rejects negative payoff and bad dimensions") {
    GameProblem p = testing::scalar_problem(testing::neg_x, 1.0, testing::x_squared);
    CHECK_NOTHROW(p.validate());
    p.dim = 3;
    CHECK_THROWS_AS(p.validate(), InvalidInput);
}
