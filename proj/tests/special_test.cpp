#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fracdrift/special.hpp"
#include "oracles.hpp"

using namespace fracdrift;

TEST_CASE("gamma matches high-precision reference values") {
    for (const auto& ref : oracles::kGammaRef) {
        CAPTURE(ref.x);
        CHECK(gamma_fn(ref.x) == Catch::Approx(ref.value).epsilon(1e-12));
    }
    CHECK_THROWS_AS(gamma_fn(0.0), std::domain_error);
    CHECK_THROWS_AS(gamma_fn(-1.5), std::domain_error);
}

TEST_CASE("gamma agrees with the C library implementation") {
    // independent route: std::tgamma
    for (double x = 0.07; x < 6.0; x += 0.0831)
        CHECK(gamma_fn(x) == Catch::Approx(std::tgamma(x)).epsilon(1e-12));
}

TEST_CASE("regularized incomplete beta against reference values") {
    for (const auto& ref : oracles::kIBetaRef) {
        CAPTURE(ref.a, ref.b, ref.x);
        CHECK(ibeta_reg(ref.a, ref.b, ref.x) == Catch::Approx(ref.value).epsilon(1e-12));
    }
}

TEST_CASE("incomplete beta endpoints and symmetry") {
    CHECK(ibeta_reg(0.7, 0.7, 0.0) == 0.0);
    CHECK(ibeta_reg(0.7, 0.7, 1.0) == 1.0);
    CHECK(ibeta_reg(1.3, 1.3, 0.5) == Catch::Approx(0.5).epsilon(1e-14));
    // equal-parameter symmetry I_x + I_{1-x} = 1
    for (double x : {0.03, 0.2, 0.41, 0.77, 0.95})
        CHECK(ibeta_reg(0.9, 0.9, x) + ibeta_reg(0.9, 0.9, 1.0 - x) ==
              Catch::Approx(1.0).epsilon(1e-13));
    CHECK_THROWS_AS(ibeta_reg(0.7, 0.7, -0.1), std::domain_error);
    CHECK_THROWS_AS(ibeta_reg(-1.0, 0.7, 0.5), std::domain_error);
}

TEST_CASE("standard normal cdf") {
    CHECK(std_normal_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(std_normal_cdf(40.0) == 1.0);
    CHECK(std_normal_cdf(-40.0) == 0.0);
    CHECK(std_normal_cdf(0.5) == Catch::Approx(oracles::kPhiHalf).margin(1e-10));
    CHECK(std_normal_cdf(1.0) == Catch::Approx(oracles::kPhiOne).margin(1e-10));
    CHECK(std_normal_cdf(2.0) == Catch::Approx(oracles::kPhiTwo).margin(1e-10));
    CHECK(std_normal_cdf(-3.0) == Catch::Approx(oracles::kPhiMinusThree).epsilon(1e-10));

    SECTION("symmetry to 1e-15") {
        for (double x : {0.1, 0.75, 1.5, 3.0, 6.0, 12.0})
            CHECK(std_normal_cdf(-x) == Catch::Approx(1.0 - std_normal_cdf(x)).margin(1e-15));
    }

    SECTION("nondecreasing on a sampled grid") {
        double prev = std_normal_cdf(-10.0);
        for (double x = -10.0; x <= 10.0; x += 0.01) {
            const double cur = std_normal_cdf(x);
            if (!(cur >= prev)) {
                CAPTURE(x, cur, prev);
                CHECK(cur >= prev);
            }
            prev = cur;
        }
        SUCCEED();
    }

    SECTION("value from quadrature of the density") {
        const double quad =
            0.5 + integrate_adaptive([](double u) { return std_normal_pdf(u); }, 0.0, 1.0, 1e-14, 1e-13);
        CHECK(std_normal_cdf(1.0) == Catch::Approx(quad).margin(1e-12));
    }
}

TEST_CASE("truncated normal moments vs adaptive quadrature") {
    struct Case {
        double mu, sd, a, b;
    };
    const Case cases[] = {{0.0, 1.0, -1.0, 2.0}, {0.5, 0.2, 0.0, 2.0},   {-3.0, 1.5, 0.0, 1.0},
                          {1.0, 0.05, 0.0, 2.0}, {0.0, 10.0, -1.0, 1.0}, {2.0, 0.3, -1.0, 0.5}};
    for (const auto& c : cases) {
        CAPTURE(c.mu, c.sd, c.a, c.b);
        const auto got = truncated_normal_moments(c.mu, c.sd, c.a, c.b);
        const double P = 1.0 / (c.sd * c.sd);
        const auto ref = oracles::truncated_posterior_quadrature(c.mu, P, c.a, c.b);
        CHECK(got.mean == Catch::Approx(ref.mean).margin(1e-10));
        CHECK(got.var == Catch::Approx(ref.var).epsilon(5e-8));
    }
}

TEST_CASE("truncated normal far-tail branch stays finite and sane") {
    // box 40+ standard deviations into one tail: direct CDF differences underflow
    const auto tn = truncated_normal_moments(0.0, 1.0, 40.0, 41.0);
    CHECK(std::isfinite(tn.mean));
    CHECK(std::isfinite(tn.var));
    CHECK(tn.mean > 40.0);
    CHECK(tn.mean < 40.1);
    // asymptotics: mean ~ a + 1/alpha, var ~ 1/alpha^2
    CHECK(tn.mean == Catch::Approx(40.0 + 1.0 / 40.0).epsilon(1e-2));
    CHECK(tn.var == Catch::Approx(1.0 / (40.0 * 40.0)).epsilon(0.05));

    // mirrored tail
    const auto tl = truncated_normal_moments(0.0, 1.0, -41.0, -40.0);
    CHECK(tl.mean == Catch::Approx(-tn.mean).margin(1e-12));
    CHECK(tl.var == Catch::Approx(tn.var).epsilon(1e-12));

    // continuity across the branch switch at ~6 sd
    const auto lo = truncated_normal_moments(0.0, 1.0, 5.999, 8.0);
    const auto hi = truncated_normal_moments(0.0, 1.0, 6.001, 8.0);
    CHECK(lo.mean == Catch::Approx(hi.mean).epsilon(1e-3));
    CHECK(lo.var == Catch::Approx(hi.var).epsilon(1e-2));
}
