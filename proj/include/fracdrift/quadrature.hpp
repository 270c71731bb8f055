#pragma once

// Quadrature machinery: Gauss-Legendre and Gauss-Hermite rules computed by
// Golub-Welsch, an adaptive Gauss-Kronrod (G7, K15) integrator, and a
// composite Simpson rule. Used by the dynamic-programming stopping solver,
// the brute-force posterior oracle, and the verification harness.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace fracdrift {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] (Golub-Welsch on the Jacobi matrix).
inline QuadRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k - 1, k) = b;
        J(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadRule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        r.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        r.weights[static_cast<std::size_t>(i)] = 2.0 * v0 * v0;
    }
    return r;
}

/// Gauss-Legendre rule mapped to [a, b].
inline QuadRule gauss_legendre(int n, double a, double b) {
    QuadRule r = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        r.nodes[i] = mid + half * r.nodes[i];
        r.weights[i] *= half;
    }
    return r;
}

/// Gauss-Hermite rule for weight exp(-x^2) (physicists' convention);
/// E[g(Z)] for Z ~ N(0,1) is sum_i w_i g(sqrt(2) x_i) / sqrt(pi).
inline QuadRule gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: order must be positive");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = std::sqrt(0.5 * k);
        J(k - 1, k) = b;
        J(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double sqrt_pi = 1.7724538509055160273;
    QuadRule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        r.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        r.weights[static_cast<std::size_t>(i)] = sqrt_pi * v0 * v0;
    }
    return r;
}

namespace detail {

// Kronrod 15-point nodes/weights with the embedded Gauss 7-point rule.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct GkResult {
    double value;
    double error;
};

inline GkResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const double fc = f(mid);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double fsum = f(mid - dx) + f(mid + dx);
        kronrod += fsum * kKronrodWeights[i];
        if (i % 2 == 1) gauss += fsum * kGaussWeights[i / 2];
    }
    kronrod *= half;
    gauss *= half;
    return {kronrod, std::abs(kronrod - gauss)};
}

inline double gk_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                          double rel_tol, int depth) {
    const GkResult r = gk15(f, a, b);
    if (r.error <= abs_tol || r.error <= rel_tol * std::abs(r.value) || depth >= 48)
        return r.value;
    const double mid = 0.5 * (a + b);
    return gk_adaptive(f, a, mid, 0.5 * abs_tol, rel_tol, depth + 1) +
           gk_adaptive(f, mid, b, 0.5 * abs_tol, rel_tol, depth + 1);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b].
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double abs_tol = 1e-12, double rel_tol = 1e-12) {
    if (a == b) return 0.0;
    return detail::gk_adaptive(f, a, b, abs_tol, rel_tol, 0);
}

/// Composite Simpson weights for an odd number of points on [a, b].
inline std::vector<double> simpson_weights(std::size_t points, double a, double b) {
    if (points < 3 || points % 2 == 0)
        throw std::invalid_argument("simpson_weights: need an odd number of points >= 3");
    const double h = (b - a) / static_cast<double>(points - 1);
    std::vector<double> w(points, h / 3.0);
    for (std::size_t i = 1; i + 1 < points; ++i) w[i] *= (i % 2 == 1) ? 4.0 : 2.0;
    return w;
}

}  // namespace fracdrift
