#pragma once

// Deterministic fractional-calculus primitives attached to a Hurst index H:
// the constants kappa_H and lambda_H, the singular kernel
//
//     k_H(t, s) = kappa_H^{-1} s^{1/2-H} (t-s)^{1/2-H},
//
// its exact interval integrals, the bracket function
//
//     w_H(t) = lambda_H^{-1} t^{2-2H},
//
// and differentiation with respect to w_H. These are the building blocks of
// the martingale transform and of every estimator downstream.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracdrift/special.hpp"
#include "fracdrift/time_grid.hpp"

namespace fracdrift {

struct HurstModel {
    double H = 0.5;
    double kappa = 1.0;   // 2H Gamma(3/2-H) Gamma(1/2+H)
    double lambda = 1.0;  // 2H Gamma(3-2H) Gamma(1/2+H) / Gamma(3/2-H)
};

inline HurstModel make_hurst_model(double H) {
    if (!(H > 0.0 && H < 1.0))
        throw std::domain_error("make_hurst_model: H must lie in (0, 1), got " + std::to_string(H));
    HurstModel m;
    m.H = H;
    m.kappa = 2.0 * H * gamma_fn(1.5 - H) * gamma_fn(0.5 + H);
    m.lambda = 2.0 * H * gamma_fn(3.0 - 2.0 * H) * gamma_fn(0.5 + H) / gamma_fn(1.5 - H);
    return m;
}

/// Kernel k_H(t, s) for 0 < s < t. Diverges at the endpoints when H > 1/2
/// (integrable singularity); use kernel_mass for integrals across them.
inline double kernel_k(const HurstModel& model, double t, double s) {
    if (!(s > 0.0 && s < t))
        throw std::domain_error("kernel_k: requires 0 < s < t");
    const double p = 0.5 - model.H;
    return std::pow(s, p) * std::pow(t - s, p) / model.kappa;
}

/// Exact integral of the kernel over [a, b] inside [0, t]:
///
///   int_a^b k_H(t,s) ds = kappa_H^{-1} t^{2-2H} B(c,c) [I_{b/t}(c,c) - I_{a/t}(c,c)],
///
/// with c = 3/2 - H, obtained from the substitution s = t u. No quadrature
/// of the singular integrand is involved.
inline double kernel_mass(const HurstModel& model, double t, double a, double b) {
    if (!(t > 0.0)) throw std::domain_error("kernel_mass: t must be positive");
    if (!(0.0 <= a && a <= b && b <= t))
        throw std::domain_error("kernel_mass: requires 0 <= a <= b <= t");
    if (a == b) return 0.0;
    const double c = 1.5 - model.H;
    const double scale = std::pow(t, 2.0 - 2.0 * model.H) * beta_fn(c, c) / model.kappa;
    return scale * (ibeta_reg(c, c, b / t) - ibeta_reg(c, c, a / t));
}

/// Bracket (quadratic-variation) function w_H(t) = lambda_H^{-1} t^{2-2H}.
inline double weight_w(const HurstModel& model, double t) {
    if (!(t >= 0.0)) throw std::domain_error("weight_w: t must be nonnegative");
    if (t == 0.0) return 0.0;
    return std::pow(t, 2.0 - 2.0 * model.H) / model.lambda;
}

/// Derivative of a sampled function with respect to w_H:
///
///   df/dw_H = (lambda_H / (2-2H)) t^{2H-1} df/dt.
///
/// df/dt uses the three-point stencil exact for quadratics (central on
/// uniform grids), one-sided at both ends. The prefactor t^{2H-1} is
/// singular or vanishing at t = 0, so the value at t_0 = 0 is defined by
/// linear extrapolation from the first two interior values; it carries zero
/// dw-weight in any integral.
inline std::vector<double> frac_derivative(const HurstModel& model, const TimeGrid& grid,
                                           const std::vector<double>& f) {
    const auto& t = grid.points();
    const std::size_t n = t.size();
    if (n < 2 || f.size() != n)
        throw std::invalid_argument("frac_derivative: need a grid with at least 2 points and matching samples");

    std::vector<double> dfdt(n);
    if (n == 2) {
        dfdt[0] = dfdt[1] = (f[1] - f[0]) / (t[1] - t[0]);
    } else {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = t[i] - t[i - 1];
            const double hr = t[i + 1] - t[i];
            dfdt[i] = -hr / (hl * (hl + hr)) * f[i - 1] + (hr - hl) / (hl * hr) * f[i] +
                      hl / (hr * (hl + hr)) * f[i + 1];
        }
        {
            const double h0 = t[1] - t[0], h1 = t[2] - t[1];
            dfdt[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * f[0] + (h0 + h1) / (h0 * h1) * f[1] -
                      h0 / (h1 * (h0 + h1)) * f[2];
        }
        {
            const double h0 = t[n - 1] - t[n - 2], h1 = t[n - 2] - t[n - 3];
            dfdt[n - 1] = (2.0 * h0 + h1) / (h0 * (h0 + h1)) * f[n - 1] -
                          (h0 + h1) / (h0 * h1) * f[n - 2] + h0 / (h1 * (h0 + h1)) * f[n - 3];
        }
    }

    const double pref = model.lambda / (2.0 - 2.0 * model.H);
    std::vector<double> out(n);
    for (std::size_t i = 1; i < n; ++i)
        out[i] = pref * std::pow(t[i], 2.0 * model.H - 1.0) * dfdt[i];

    if (n == 2) {
        out[0] = out[1];
    } else {
        const double slope = (out[2] - out[1]) / (t[2] - t[1]);
        out[0] = out[1] - slope * (t[1] - t[0]);
    }
    return out;
}

}  // namespace fracdrift
