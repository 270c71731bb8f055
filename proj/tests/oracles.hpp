#pragma once

// Test-side oracles, kept independent of the implementation paths they
// check: graded-mesh adaptive quadrature for the singular kernel, adaptive
// moments of the truncated posterior density, basic sample statistics, and
// high-precision reference constants (50-digit computations, frozen to 17
// significant digits).

#include <cmath>
#include <functional>
#include <vector>

#include "fracdrift/quadrature.hpp"

namespace oracles {

// --- reference constants ----------------------------------------------------

// Gamma function on the argument range the library exercises.
struct GammaRef {
    double x, value;
};
inline constexpr GammaRef kGammaRef[] = {
    {0.1, 9.5135076986687318},  {0.3, 2.9915689876875906},  {0.5, 1.7724538509055160},
    {0.7, 1.2980553326475578},  {0.9, 1.0686287021193194},  {1.0, 1.0000000000000000},
    {1.2, 0.91816874239976061}, {1.3, 0.89747069630627719}, {1.4, 0.88726381750307529},
    {1.5, 0.88622692545275801}, {1.7, 0.90863873285329045}, {2.0, 1.0000000000000000},
    {2.4, 1.2421693445043054},  {2.6, 1.4296245588603044},  {3.0, 2.0000000000000000},
    {3.6, 3.7170238530367915},  {4.2, 7.7566895357931776},  {4.6, 13.381285870932449},
    {5.0, 24.000000000000000}};

// kappa_H and lambda_H.
struct HurstRef {
    double H, kappa, lambda;
};
inline constexpr HurstRef kHurstRef[] = {
    {0.2, 0.46598664929411198, 0.82709409452594779},
    {0.3, 0.64137559926935707, 0.94503573922860584},
    {0.35, 0.72659500323502868, 0.97376608450344294},
    {0.5, 1.0000000000000000, 1.0000000000000000},
    {0.65, 1.3493907202936247, 0.99069876847587456},
    {0.7, 1.4965430649618332, 0.98653813492128811},
    {0.8, 1.8639465971764479, 0.98152151893581152}};

// Regularized incomplete beta I_x(a, a) plus one asymmetric pair.
struct IBetaRef {
    double a, b, x, value;
};
inline constexpr IBetaRef kIBetaRef[] = {
    {0.7, 0.7, 0.05, 0.092977444859050074}, {0.7, 0.7, 0.1, 0.15203027151948045},
    {0.7, 0.7, 0.25, 0.29490818134440040},  {0.7, 0.7, 0.5, 0.50000000000000000},
    {0.7, 0.7, 0.75, 0.70509181865559960},  {0.7, 0.7, 0.9, 0.84796972848051955},
    {1.3, 1.3, 0.05, 0.027552120583695911}, {1.3, 1.3, 0.1, 0.067238749498613097},
    {1.3, 1.3, 0.25, 0.21499359591296918},  {1.3, 1.3, 0.5, 0.50000000000000000},
    {1.3, 1.3, 0.75, 0.78500640408703082},  {1.3, 1.3, 0.9, 0.93276125050138690},
    {0.9, 1.4, 0.3, 0.43457985705213278}};

inline constexpr double kPhiHalf = 0.69146246127401310;
inline constexpr double kPhiOne = 0.84134474606854295;
inline constexpr double kPhiTwo = 0.97724986805182079;
inline constexpr double kPhiMinusThree = 0.0013498980316300945;

// beta_H(i), i = 0..3.
inline constexpr double kBeta02[] = {0.0, 1.0, 1.6250000000000000, 2.1562500000000000};
inline constexpr double kBeta08[] = {0.0, 1.0, 3.5000000000000000, 6.3750000000000000};

// alpha_H(i, j) packed as [i][j], i,j = 0..3.
inline constexpr double kAlpha02[4][4] = {
    {0, 0, 0, 0},
    {0, 1.2090522790797508, 1.2090522790797508, 1.1586751007847612},
    {0, 1.2090522790797508, 1.4189571886422075, 1.4735324651284463},
    {0, 1.1586751007847612, 1.4735324651284463, 1.6061099053288765}};
inline constexpr double kAlpha08[4][4] = {
    {0, 0, 0, 0},
    {0, 1.0188263636687490, 1.0188263636687490, 1.0825030113980458},
    {0, 1.0188263636687490, 2.0801038258236958, 2.6744192046304661},
    {0, 1.0825030113980458, 2.6744192046304661, 3.7641581987250229}};

// Spot values.
inline constexpr double kKernel02_t1_s05 = 1.4158215828411793;   // k_{0.2}(1, 0.5)
inline constexpr double kKernel08_t2_s1 = 0.53649605708383736;   // k_{0.8}(2, 1)
inline constexpr double kWeight02_t2 = 3.6651611383566629;       // w_{0.2}(2)
inline constexpr double kWeight08_t2 = 1.3443494465648960;       // w_{0.8}(2)
inline constexpr double kMass02_full_t1 = 1.2090522790797508;    // int_0^1 k_{0.2}(1, s) ds
inline constexpr double kMass02_full_t25 = 5.2378022021819134;   // t = 2.5
inline constexpr double kMass08_full_t1 = 1.0188263636687490;
inline constexpr double kMass08_full_t07 = 0.88336337783117437;  // t = 0.7
inline constexpr double kMass02_t1_02_07 = 0.68656084269331375;  // [0.2, 0.7], t = 1
inline constexpr double kMass08_t1_0_05 = 0.50941318183437449;   // [0, 0.5], t = 1
inline constexpr double kMass08_t2_1_2 = 0.67217472328244798;    // [1, 2], t = 2
inline constexpr double kPsi3_08_t05 = 1.5937500000000000;       // beta_{0.8}(3) * 0.5^2
inline constexpr double kDw02_t3_at05 = 0.58764385365745135;     // d(t^3)/dw at t=0.5, H=0.2
inline constexpr double kDw08_t2_at15 = 9.3889244485663133;      // d(t^2)/dw at t=1.5, H=0.8

// --- numerical oracles -------------------------------------------------------

/// Kernel interval integral by adaptive quadrature of the raw integrand,
/// independent of the incomplete-beta route. Endpoint power singularities
/// are removed exactly by the substitutions u = s^q and v = (t-s)^q with
/// q = 3/2 - H, under which s^{1/2-H} ds = du / q (and likewise on the
/// right), leaving a smooth integrand.
inline double kernel_mass_quadrature(double H, double kappa, double t, double a, double b) {
    const double p = 0.5 - H;
    const double q = 1.5 - H;
    const double mid = 0.5 * (a + b);
    using fracdrift::integrate_adaptive;

    double left;
    if (a == 0.0) {
        auto g = [&](double u) {
            const double s = std::pow(u, 1.0 / q);
            return std::pow(t - s, p) / (q * kappa);
        };
        left = integrate_adaptive(g, 0.0, std::pow(mid, q), 1e-13, 1e-12);
    } else {
        auto f = [&](double s) { return std::pow(s, p) * std::pow(t - s, p) / kappa; };
        left = integrate_adaptive(f, a, mid, 1e-13, 1e-12);
    }

    double right;
    if (b == t) {
        auto g = [&](double v) {
            const double s = t - std::pow(v, 1.0 / q);
            return std::pow(s, p) / (q * kappa);
        };
        right = integrate_adaptive(g, 0.0, std::pow(t - mid, q), 1e-13, 1e-12);
    } else {
        auto f = [&](double s) { return std::pow(s, p) * std::pow(t - s, p) / kappa; };
        right = integrate_adaptive(f, mid, b, 1e-13, 1e-12);
    }
    return left + right;
}

/// Moments of the truncated posterior density exp(P(x mu - x^2/2)) on [a, b]
/// by adaptive quadrature (tolerance ~1e-12), the reference for the
/// closed-form scalar uniform-prior estimate.
struct TruncMoments {
    double mean, var;
};
inline TruncMoments truncated_posterior_quadrature(double mu, double P, double a, double b) {
    auto logf = [&](double x) { return P * (x * mu - 0.5 * x * x); };
    // peak of the log-density inside [a, b] for stable scaling
    const double peak = logf(std::min(std::max(mu, a), b));
    auto f0 = [&](double x) { return std::exp(logf(x) - peak); };
    auto f1 = [&](double x) { return x * f0(x); };
    const double mid = std::min(std::max(mu, a), b);
    auto integrate = [&](const std::function<double(double)>& g) {
        return fracdrift::integrate_adaptive(g, a, mid, 1e-14, 1e-13) +
               fracdrift::integrate_adaptive(g, mid, b, 1e-14, 1e-13);
    };
    const double z = integrate(f0);
    const double m1 = integrate(f1) / z;
    auto f2 = [&](double x) { return (x - m1) * (x - m1) * f0(x); };
    return {m1, integrate(f2) / z};
}

// --- sample statistics -------------------------------------------------------

inline double sample_mean(const std::vector<double>& xs) {
    double m = 0.0;
    for (double v : xs) m += v;
    return m / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
    const double m = sample_mean(xs);
    double ss = 0.0;
    for (double v : xs) ss += (v - m) * (v - m);
    return ss / static_cast<double>(xs.size() - 1);
}

inline double sample_covariance(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double mx = sample_mean(xs), my = sample_mean(ys);
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) ss += (xs[i] - mx) * (ys[i] - my);
    return ss / static_cast<double>(xs.size() - 1);
}

inline double mean_se(const std::vector<double>& xs) {
    return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

/// Normal-theory standard error of a sample variance.
inline double variance_se(const std::vector<double>& xs) {
    return sample_variance(xs) * std::sqrt(2.0 / static_cast<double>(xs.size() - 1));
}

}  // namespace oracles
