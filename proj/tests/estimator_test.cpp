#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fracdrift/estimator.hpp"
#include "fracdrift/fbm.hpp"
#include "oracles.hpp"

using namespace fracdrift;

namespace {

SamplePath deterministic_path(const TimeGrid& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
    return SamplePath(grid, std::move(v));
}

}  // namespace

TEST_CASE("gram matrix") {
    const TimeGrid grid = TimeGrid::uniform(1.0, 512);

    SECTION("classical values at H = 1/2 with basis {t, t^2}") {
        const HurstModel m = make_hurst_model(0.5);
        const double sigma = 1.5;
        const PsiEvaluations psi = psi_closed_poly(m, polynomial_basis(2, sigma), grid);
        for (double t : {0.25, 1.0}) {
            const GramMatrix g = gram_matrix(psi, m, t);
            REQUIRE(g.indices == std::vector<int>{1, 2});
            const double s2 = sigma * sigma;
            CHECK(g.R(0, 0) == Catch::Approx(t / s2).epsilon(1e-12));
            CHECK(g.R(0, 1) == Catch::Approx(t * t / s2).epsilon(1e-12));
            CHECK(g.R(1, 1) == Catch::Approx(4.0 / 3.0 * t * t * t / s2).epsilon(1e-12));
        }
    }

    SECTION("single linear index: R = w/sigma^2 for every H") {
        for (double H : {0.2, 0.8}) {
            const HurstModel m = make_hurst_model(H);
            const PsiEvaluations psi = psi_closed_poly(m, polynomial_basis(1, 2.0), grid);
            const GramMatrix g = gram_matrix(psi, m, 1.0);
            CHECK(g.R(0, 0) == Catch::Approx(weight_w(m, 1.0) / 4.0).epsilon(1e-12));
        }
    }

    SECTION("numeric route matches the closed form") {
        // For H > 1/2 the dw-mass concentrates at t -> 0 where the numeric
        // psi rows are documented to degrade, so the strict dual-route check
        // applies to the antipersistent side.
        for (double H : {0.2, 0.35}) {
            const HurstModel m = make_hurst_model(H);
            const DriftBasis basis = polynomial_basis(2, 1.0);
            const PsiEvaluations closed = psi_closed_poly(m, basis, grid);
            const PsiEvaluations numeric = psi_numeric(m, basis, grid);
            const GramMatrix gc = gram_matrix(closed, m, 1.0);
            const GramMatrix gn = gram_matrix(numeric, m, 1.0);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    CAPTURE(H, a, b);
                    CHECK(gn.R(a, b) == Catch::Approx(gc.R(a, b)).epsilon(1e-3));
                }
        }
    }

    SECTION("t = 0 yields the zero matrix with infinite condition") {
        const HurstModel m = make_hurst_model(0.3);
        const PsiEvaluations psi = psi_closed_poly(m, polynomial_basis(1, 1.0), grid);
        const GramMatrix g = gram_matrix(psi, m, 0.0);
        CHECK(g.R(0, 0) == 0.0);
        CHECK(std::isinf(g.condition_estimate));
    }
}

TEST_CASE("score vector") {
    const TimeGrid grid = TimeGrid::uniform(1.0, 128);
    const HurstModel m = make_hurst_model(0.2);

    SECTION("constant psi telescopes to psi * M(t)") {
        const PsiEvaluations psi = psi_closed_poly(m, polynomial_basis(1, 2.0), grid);
        const SamplePath xi = deterministic_path(grid, [](double t) { return t * t; });
        const MartingalePath mp = martingale_transform(xi, 2.0, m);
        const ScoreVector s = score_vector(psi, mp, 1.0);
        CHECK(s.psiH[0] == Catch::Approx(mp.M.back() / 2.0).epsilon(1e-12));
    }

    SECTION("constant observation gives the zero score") {
        const PsiEvaluations psi = psi_closed_poly(m, polynomial_basis(2, 1.0), grid);
        const SamplePath xi = deterministic_path(grid, [](double) { return 1.0; });
        const ScoreVector s = score_vector(psi, martingale_transform(xi, 1.0, m), 1.0);
        for (Eigen::Index i = 0; i < s.psiH.size(); ++i) CHECK(s.psiH[i] == 0.0);
    }

    SECTION("grid mismatch rejected") {
        const PsiEvaluations psi = psi_closed_poly(m, polynomial_basis(1, 1.0), grid);
        const TimeGrid other = TimeGrid::uniform(1.0, 64);
        const MartingalePath mp =
            martingale_transform(deterministic_path(other, [](double t) { return t; }), 1.0, m);
        CHECK_THROWS_AS(score_vector(psi, mp, 1.0), std::invalid_argument);
    }
}

TEST_CASE("maximum-likelihood estimate") {
    SECTION("brownian linear drift: theta_1 = xi(T)/T") {
        const HurstModel m = make_hurst_model(0.5);
        const TimeGrid grid = TimeGrid::uniform(2.0, 256);
        const SamplePath xi = simulate_observation({0.0, 1.4}, polynomial_basis(1, 1.0), m, grid, {3, 1});
        const PsiEvaluations psi = psi_closed_poly(m, polynomial_basis(1, 1.0), grid);
        const MartingalePath mp = martingale_transform(xi, 1.0, m);
        const EstimationResult est = mle_estimate(psi, m, mp, 2.0);
        CHECK(est.theta_hat[1] == Catch::Approx(xi.values.back() / 2.0).epsilon(1e-10));
        CHECK(est.theta_hat[0] == Catch::Approx(xi.values.front()).margin(1e-14));
        // the scalar formula sigma M / w
        CHECK(est.theta_hat[1] == Catch::Approx(mp.M.back() / mp.w.back()).epsilon(1e-10));
    }

    SECTION("near-noise-free planted parameters recovered (n = 2, H = 0.2)") {
        const HurstModel m = make_hurst_model(0.2);
        const TimeGrid grid = TimeGrid::uniform(1.0, 512);
        const DriftBasis basis = polynomial_basis(2, 1e-8);
        const std::vector<double> truth{0.4, -1.2, 2.3};
        const SamplePath xi = simulate_observation(truth, basis, m, grid, {19, 7});
        const PsiEvaluations psi = psi_closed_poly(m, basis, grid);
        const EstimationResult est = mle_estimate(psi, m, martingale_transform(xi, 1e-8, m), 1.0);
        CHECK(est.theta_hat[0] == Catch::Approx(0.4).margin(1e-4));
        CHECK(est.theta_hat[1] == Catch::Approx(-1.2).margin(1e-4));
        CHECK(est.theta_hat[2] == Catch::Approx(2.3).margin(1e-4));
    }

    SECTION("normal-equation residual") {
        const HurstModel m = make_hurst_model(0.65);
        const TimeGrid grid = TimeGrid::uniform(1.0, 256);
        const DriftBasis basis = polynomial_basis(2, 0.7);
        const SamplePath xi = simulate_observation({0.0, 1.0, -0.5}, basis, m, grid, {29, 2});
        const PsiEvaluations psi = psi_closed_poly(m, basis, grid);
        const MartingalePath mp = martingale_transform(xi, 0.7, m);
        const GramMatrix g = gram_matrix(psi, m, 1.0);
        const ScoreVector s = score_vector(psi, mp, 1.0);
        const EstimationResult est = mle_estimate(psi, m, mp, 1.0);
        Eigen::VectorXd th(2);
        th << est.theta_hat[1], est.theta_hat[2];
        CHECK((g.R * th - s.psiH).norm() <= 1e-10 * s.psiH.norm());
    }

    SECTION("estimate maximizes the likelihood") {
        const HurstModel m = make_hurst_model(0.2);
        const TimeGrid grid = TimeGrid::uniform(1.0, 128);
        const DriftBasis basis = polynomial_basis(2, 1.0);
        const SamplePath xi = simulate_observation({0.0, 0.8, 0.3}, basis, m, grid, {47, 4});
        const PsiEvaluations psi = psi_closed_poly(m, basis, grid);
        const MartingalePath mp = martingale_transform(xi, 1.0, m);
        const EstimationResult est = mle_estimate(psi, m, mp, 1.0);
        const double at_hat = log_likelihood(est.theta_hat, psi, m, mp, 1.0);
        Rng rng(RngSeed{13, 0});
        for (int k = 0; k < 50; ++k) {
            Eigen::VectorXd delta = Eigen::VectorXd::Zero(3);
            delta[1] = rng.next_normal();
            delta[2] = rng.next_normal();
            delta *= 0.01 / delta.norm();
            CHECK(log_likelihood(est.theta_hat + delta, psi, m, mp, 1.0) <= at_hat + 1e-12);
        }
    }

    SECTION("equivariance under basis scaling") {
        // scaling phi by c scales psi by c, R by c^2, psiH by c, theta by 1/c
        const HurstModel m = make_hurst_model(0.35);
        const TimeGrid grid = TimeGrid::uniform(1.0, 256);
        const double c = 3.7;

        std::vector<double> d1(grid.size()), d2(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            d1[j] = 1.0;                                  // phi' of t
            d2[j] = 2.0 * grid[j];                        // phi' of t^2
        }
        std::vector<double> s1 = d1, s2 = d2;
        for (auto& v : s1) v *= c;
        for (auto& v : s2) v *= c;

        const DriftBasis base = tabulated_basis(grid, {d1, d2}, 1.0);
        const DriftBasis scaled = tabulated_basis(grid, {s1, s2}, 1.0);
        const PsiEvaluations p1 = psi_numeric(m, base, grid);
        const PsiEvaluations p2 = psi_numeric(m, scaled, grid);

        const SamplePath xi =
            simulate_observation({0.6, -0.4}, base, m, grid, {61, 8});
        const MartingalePath mp = martingale_transform(xi, 1.0, m);

        const GramMatrix g1 = gram_matrix(p1, m, 1.0);
        const GramMatrix g2 = gram_matrix(p2, m, 1.0);
        CHECK(g2.R(0, 0) == Catch::Approx(c * c * g1.R(0, 0)).epsilon(1e-10));
        CHECK(g2.R(0, 1) == Catch::Approx(c * c * g1.R(0, 1)).epsilon(1e-10));

        const ScoreVector v1 = score_vector(p1, mp, 1.0);
        const ScoreVector v2 = score_vector(p2, mp, 1.0);
        CHECK(v2.psiH[0] == Catch::Approx(c * v1.psiH[0]).epsilon(1e-10));

        const EstimationResult e1 = mle_estimate(p1, m, mp, 1.0);
        const EstimationResult e2 = mle_estimate(p2, m, mp, 1.0);
        CHECK(e2.theta_hat[0] == Catch::Approx(e1.theta_hat[0] / c).epsilon(1e-10));
        CHECK(e2.theta_hat[1] == Catch::Approx(e1.theta_hat[1] / c).epsilon(1e-10));
    }

    SECTION("t = 0 rejected") {
        const HurstModel m = make_hurst_model(0.3);
        const TimeGrid grid = TimeGrid::uniform(1.0, 64);
        const PsiEvaluations psi = psi_closed_poly(m, polynomial_basis(1, 1.0), grid);
        const MartingalePath mp =
            martingale_transform(deterministic_path(grid, [](double t) { return t; }), 1.0, m);
        CHECK_THROWS_AS(mle_estimate(psi, m, mp, 0.0), std::invalid_argument);
    }
}

TEST_CASE("monte carlo sanity of the scalar estimate (H = 0.2)") {
    const HurstModel m = make_hurst_model(0.2);
    const TimeGrid grid = TimeGrid::uniform(1.0, 256);
    const DriftBasis basis = polynomial_basis(1, 1.0);
    const PsiEvaluations psi = psi_closed_poly(m, basis, grid);
    const FbmSampler sampler(m, grid);
    const MartingaleTransform tr(m, grid, 1.0);

    const int reps = 600;
    std::vector<double> est(reps);
    for (int r = 0; r < reps; ++r) {
        Rng rng(RngSeed{91, static_cast<std::uint64_t>(r)});
        SamplePath xi = sampler.sample(rng);
        for (std::size_t j = 0; j < grid.size(); ++j) xi.values[j] = 1.0 * grid[j] + xi.values[j];
        est[static_cast<std::size_t>(r)] = mle_estimate(psi, m, tr.apply(xi), 1.0).theta_hat[1];
    }
    const double mean = oracles::sample_mean(est);
    CHECK(std::abs(mean - 1.0) < 3.0 * oracles::mean_se(est));
    const double fisher_var = 1.0 / weight_w(m, 1.0);
    CHECK(std::abs(oracles::sample_variance(est) - fisher_var) < 0.15 * fisher_var);
}

TEST_CASE("estimate trajectory emits usable rows") {
    const HurstModel m = make_hurst_model(0.35);
    const TimeGrid grid = TimeGrid::uniform(1.0, 64);
    const DriftBasis basis = polynomial_basis(1, 1.0);
    const SamplePath xi = simulate_observation({0.2, 1.0}, basis, m, grid, {111, 0});
    const PsiEvaluations psi = psi_closed_poly(m, basis, grid);
    const auto traj = estimate_trajectory(psi, m, martingale_transform(xi, 1.0, m), 4);
    REQUIRE(traj.size() >= 10);
    for (const auto& p : traj) {
        CHECK(p.t > 0.0);
        CHECK(std::isfinite(p.theta_hat[1]));
        CHECK(p.condition <= kConditionLimit);
    }
}
