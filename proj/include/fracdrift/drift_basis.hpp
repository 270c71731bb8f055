#pragma once

// Drift bases phi_0..phi_n and the psi_i functions they induce:
//
//     psi_i(t) = d/dw_H int_0^t k_H(t,s) sigma^{-1}(s) phi_i'(s) ds.
//
// For the polynomial basis phi_i(t) = t^i with constant sigma the psi_i have
// the closed form (beta_H(i)/sigma) t^{i-1}; the generic numeric evaluation
// goes through exact kernel interval masses followed by the fractional
// derivative, and the two routes cross-check each other in the test suite.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fracdrift/hurst.hpp"
#include "fracdrift/sample_path.hpp"
#include "fracdrift/time_grid.hpp"

namespace fracdrift {

namespace detail {

// Lower-triangular table of exact kernel interval masses:
//   at(k, j) = kernel_mass(t_k, s_j, s_{j+1}),  1 <= k < grid.size(), j < k.
class KernelMassTable {
  public:
    KernelMassTable(const HurstModel& model, const TimeGrid& grid) : n_(grid.size()) {
        offsets_.resize(n_, 0);
        std::size_t total = 0;
        for (std::size_t k = 1; k < n_; ++k) {
            offsets_[k] = total;
            total += k;
        }
        data_.resize(total);
        const auto& t = grid.points();
        for (std::size_t k = 1; k < n_; ++k)
            for (std::size_t j = 0; j < k; ++j)
                data_[offsets_[k] + j] = kernel_mass(model, t[k], t[j], t[j + 1]);
    }

    double at(std::size_t k, std::size_t j) const { return data_[offsets_[k] + j]; }

  private:
    std::size_t n_;
    std::vector<std::size_t> offsets_;
    std::vector<double> data_;
};

inline double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    std::size_t hi = 1;
    while (xs[hi] < x) ++hi;
    const double u = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
    return (1.0 - u) * ys[hi - 1] + u * ys[hi];
}

}  // namespace detail

/// Specification of the drift basis and the diffusion coefficient sigma(t).
struct DriftBasis {
    enum class Kind { polynomial, tabulated };

    Kind kind = Kind::polynomial;
    int degree = 0;                          // polynomial: phi_i(t) = t^i, i = 0..degree
    TimeGrid table_grid;                     // tabulated: sample grid of the derivatives
    std::vector<std::vector<double>> dphi;   // tabulated: rows phi_i' on table_grid
    double sigma_const = 1.0;                // used when sigma_fn is empty
    std::function<double(double)> sigma_fn;  // nonconstant sigma (transform/estimation only)

    int dimension() const {
        return kind == Kind::polynomial ? degree + 1 : static_cast<int>(dphi.size());
    }

    bool sigma_is_constant() const { return !sigma_fn; }

    double sigma(double t) const { return sigma_fn ? sigma_fn(t) : sigma_const; }

    /// phi_i'(t); tabulated rows are interpolated linearly between samples.
    double dphi_at(int i, double t) const {
        if (i < 0 || i >= dimension()) throw std::invalid_argument("DriftBasis: basis index out of range");
        if (kind == Kind::polynomial) {
            if (i == 0) return 0.0;
            return static_cast<double>(i) * std::pow(t, static_cast<double>(i - 1));
        }
        return detail::interp_linear(table_grid.points(), dphi[static_cast<std::size_t>(i)], t);
    }

    /// phi_i(t) at a grid point of `grid`. Tabulated bases use the
    /// convention phi_i(0) = 0 and integrate phi_i' by the trapezoid rule,
    /// which requires `grid` to coincide with the table grid.
    double phi_at(int i, const TimeGrid& grid, std::size_t idx) const {
        if (i < 0 || i >= dimension()) throw std::invalid_argument("DriftBasis: basis index out of range");
        if (kind == Kind::polynomial) return std::pow(grid[idx], static_cast<double>(i));
        if (!grid.same_as(table_grid))
            throw std::invalid_argument("DriftBasis: tabulated basis values require the table grid");
        const auto& row = dphi[static_cast<std::size_t>(i)];
        double acc = 0.0;
        for (std::size_t j = 0; j < idx; ++j)
            acc += 0.5 * (row[j] + row[j + 1]) * (grid[j + 1] - grid[j]);
        return acc;
    }
};

inline DriftBasis polynomial_basis(int degree, double sigma = 1.0) {
    if (degree < 0) throw std::invalid_argument("polynomial_basis: degree must be nonnegative");
    if (!(sigma > 0.0)) throw std::invalid_argument("polynomial_basis: sigma must be positive");
    DriftBasis b;
    b.kind = DriftBasis::Kind::polynomial;
    b.degree = degree;
    b.sigma_const = sigma;
    return b;
}

inline DriftBasis polynomial_basis(int degree, std::function<double(double)> sigma) {
    DriftBasis b = polynomial_basis(degree);
    b.sigma_fn = std::move(sigma);
    return b;
}

inline DriftBasis tabulated_basis(TimeGrid grid, std::vector<std::vector<double>> dphi,
                                  double sigma = 1.0) {
    if (dphi.empty()) throw std::invalid_argument("tabulated_basis: need at least one row");
    for (const auto& row : dphi)
        if (row.size() != grid.size())
            throw std::invalid_argument("tabulated_basis: row length must match the grid");
    if (!(sigma > 0.0)) throw std::invalid_argument("tabulated_basis: sigma must be positive");
    DriftBasis b;
    b.kind = DriftBasis::Kind::tabulated;
    b.table_grid = std::move(grid);
    b.dphi = std::move(dphi);
    b.sigma_const = sigma;
    return b;
}

/// Sampled psi_i rows on a grid, with the identifiability mask (rows that
/// vanish identically, e.g. the constant basis function, are excluded from
/// the likelihood system).
struct PsiEvaluations {
    TimeGrid grid;
    std::vector<std::vector<double>> psi;  // rows i = 0..n
    std::vector<bool> identifiable;

    bool from_polynomial = false;  // basis was phi_i = t^i
    bool closed_form = false;      // rows are the exact beta_H(i)/sigma t^{i-1}
    double sigma_const = std::numeric_limits<double>::quiet_NaN();

    int dimension() const { return static_cast<int>(psi.size()); }

    std::vector<int> identifiable_indices() const {
        std::vector<int> out;
        for (int i = 0; i < dimension(); ++i)
            if (identifiable[static_cast<std::size_t>(i)]) out.push_back(i);
        return out;
    }
};

/// beta_H(i) from the polynomial closed form. beta_H(0) = 0, beta_H(1) = 1
/// for every H, and beta_{1/2}(i) = i.
inline double beta_coeff(const HurstModel& model, int i) {
    if (i < 0) throw std::domain_error("beta_coeff: i must be nonnegative");
    if (i == 0) return 0.0;
    const double H = model.H;
    const double di = static_cast<double>(i);
    return di * (2.0 - 2.0 * H + di - 1.0) / (2.0 - 2.0 * H) *
           (gamma_fn(3.0 - 2.0 * H) / gamma_fn(3.0 - 2.0 * H + di - 1.0)) *
           (gamma_fn(1.5 - H + di - 1.0) / gamma_fn(1.5 - H));
}

/// alpha_H(i,j) = lambda_H^{-1} beta_H(i) beta_H(j) (2-2H)/(i+j-2H);
/// symmetric, and zero whenever i = 0 or j = 0.
inline double alpha_coeff(const HurstModel& model, int i, int j) {
    const double bb = beta_coeff(model, i) * beta_coeff(model, j);
    if (bb == 0.0) return 0.0;
    const double H = model.H;
    return bb * (2.0 - 2.0 * H) / (static_cast<double>(i + j) - 2.0 * H) / model.lambda;
}

/// Closed-form psi rows for the polynomial basis with constant sigma:
/// psi_i(t) = (beta_H(i)/sigma) t^{i-1}. Row 0 vanishes and is flagged
/// unidentifiable.
inline PsiEvaluations psi_closed_poly(const HurstModel& model, const DriftBasis& basis,
                                      const TimeGrid& grid) {
    if (basis.kind != DriftBasis::Kind::polynomial)
        throw std::invalid_argument("psi_closed_poly: polynomial basis required");
    if (!basis.sigma_is_constant())
        throw std::invalid_argument("psi_closed_poly: closed form requires constant sigma");

    const int n = basis.degree;
    const double sigma = basis.sigma_const;
    PsiEvaluations out;
    out.grid = grid;
    out.psi.assign(static_cast<std::size_t>(n) + 1, std::vector<double>(grid.size(), 0.0));
    out.identifiable.assign(static_cast<std::size_t>(n) + 1, true);
    out.identifiable[0] = false;
    out.from_polynomial = true;
    out.closed_form = true;
    out.sigma_const = sigma;

    for (int i = 1; i <= n; ++i) {
        const double bi = beta_coeff(model, i) / sigma;
        for (std::size_t j = 0; j < grid.size(); ++j)
            out.psi[static_cast<std::size_t>(i)][j] =
                bi * std::pow(grid[j], static_cast<double>(i - 1));  // t^0 = 1 at t = 0
    }
    return out;
}

/// Generic numeric psi rows:
///   F_i(t_k) = sum_j sigma(sbar_j)^{-1} phi_i'(sbar_j) kernel_mass(t_k, s_j, s_{j+1}),
/// followed by the fractional derivative of F_i. Rows whose magnitude never
/// exceeds 1e-12 of the overall scale are flagged unidentifiable.
inline PsiEvaluations psi_numeric(const HurstModel& model, const DriftBasis& basis,
                                  const TimeGrid& grid) {
    if (grid.steps() < 8)
        throw std::invalid_argument("psi_numeric: grid too coarse (need at least 8 steps)");

    const int dim = basis.dimension();
    const auto& t = grid.points();
    const std::size_t n = t.size();

    detail::KernelMassTable masses(model, grid);

    std::vector<double> inv_sigma(n - 1), mid(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        mid[j] = 0.5 * (t[j] + t[j + 1]);
        const double s = basis.sigma(mid[j]);
        if (!(s > 0.0))
            throw std::invalid_argument("psi_numeric: sigma must be positive on the grid interior");
        inv_sigma[j] = 1.0 / s;
    }

    PsiEvaluations out;
    out.grid = grid;
    out.psi.resize(static_cast<std::size_t>(dim));
    out.identifiable.assign(static_cast<std::size_t>(dim), true);
    out.from_polynomial = (basis.kind == DriftBasis::Kind::polynomial);
    out.closed_form = false;
    out.sigma_const =
        basis.sigma_is_constant() ? basis.sigma_const : std::numeric_limits<double>::quiet_NaN();

    for (int i = 0; i < dim; ++i) {
        std::vector<double> F(n, 0.0);
        std::vector<double> g(n - 1);
        for (std::size_t j = 0; j + 1 < n; ++j) g[j] = inv_sigma[j] * basis.dphi_at(i, mid[j]);
        for (std::size_t k = 1; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) acc += g[j] * masses.at(k, j);
            F[k] = acc;
        }
        out.psi[static_cast<std::size_t>(i)] = frac_derivative(model, grid, F);
    }

    double scale = 0.0;
    for (const auto& row : out.psi)
        for (double v : row) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * std::max(scale, 1.0);
    for (int i = 0; i < dim; ++i) {
        double mx = 0.0;
        for (double v : out.psi[static_cast<std::size_t>(i)]) mx = std::max(mx, std::abs(v));
        if (mx < tol) out.identifiable[static_cast<std::size_t>(i)] = false;
    }
    return out;
}

}  // namespace fracdrift
