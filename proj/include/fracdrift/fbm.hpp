#pragma once

// Sample-path generation for standard fractional Brownian motion and for the
// observation process xi_t = sum_i theta_i phi_i(t) + sigma B^H_t.
//
// Two exact-in-distribution schemes are provided: dense Cholesky of the
// covariance matrix (arbitrary grids, N <= 4096) and the Hosking recursion
// on the stationary increments (uniform grids), which cross-check each other
// statistically.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracdrift/drift_basis.hpp"
#include "fracdrift/hurst.hpp"
#include "fracdrift/rng.hpp"
#include "fracdrift/sample_path.hpp"
#include "fracdrift/time_grid.hpp"

namespace fracdrift {

/// Covariance of standard FBM, E[B^H_s B^H_t] = (s^2H + t^2H - |t-s|^2H)/2.
inline double fbm_covariance(const HurstModel& model, double s, double t) {
    if (s < 0.0 || t < 0.0) throw std::domain_error("fbm_covariance: times must be nonnegative");
    if (s == 0.0 || t == 0.0) return 0.0;
    const double p = 2.0 * model.H;
    return 0.5 * (std::pow(s, p) + std::pow(t, p) - std::pow(std::abs(t - s), p));
}

enum class FbmMethod { cholesky, hosking };

/// Raised when the covariance factorization fails even after the one-shot
/// diagonal jitter retry; carries the first non-positive pivot index.
class FactorizationError : public std::runtime_error {
  public:
    FactorizationError(std::size_t pivot)
        : std::runtime_error("FBM covariance factorization failed at pivot index " +
                             std::to_string(pivot)),
          pivot_(pivot) {}
    std::size_t pivot() const { return pivot_; }

  private:
    std::size_t pivot_;
};

/// Holds the factorization (or recursion coefficients) for a fixed
/// (model, grid, method) so that repeated Monte Carlo sampling is a
/// triangular matrix-vector product per path.
class FbmSampler {
  public:
    FbmSampler(const HurstModel& model, const TimeGrid& grid, FbmMethod method = FbmMethod::cholesky)
        : model_(model), grid_(grid), method_(method) {
        if (grid_.size() < 2) return;  // degenerate grid {0}

        if (method_ == FbmMethod::cholesky) {
            if (grid_.size() - 1 > 4096)
                throw std::invalid_argument("FbmSampler: cholesky limited to 4096 grid steps");
            build_cholesky();
        } else {
            if (!grid_.is_uniform())
                throw std::invalid_argument("FbmSampler: hosking requires a uniform grid");
            build_hosking();
        }
    }

    const TimeGrid& grid() const { return grid_; }

    SamplePath sample(RngSeed seed) const {
        Rng rng(seed);
        return sample(rng);
    }

    /// Draws a path continuing an existing stream (used by the harness when
    /// the replication stream first draws parameters, then the path).
    SamplePath sample(Rng& rng) const {
        const std::size_t npts = grid_.size();
        std::vector<double> values(npts, 0.0);
        if (npts < 2) return SamplePath(grid_, std::move(values));

        const std::size_t n = npts - 1;
        if (method_ == FbmMethod::cholesky) {
            Eigen::VectorXd z(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) z[static_cast<Eigen::Index>(i)] = rng.next_normal();
            Eigen::VectorXd x = chol_ * z;
            for (std::size_t i = 0; i < n; ++i) values[i + 1] = x[static_cast<Eigen::Index>(i)];
        } else {
            // Hosking: conditional draws of unit-variance fGn, then scale and sum.
            std::vector<double> y(n);
            y[0] = rng.next_normal();
            for (std::size_t k = 1; k < n; ++k) {
                const double* phi = &phi_rows_[k * (k - 1) / 2];
                double mean = 0.0;
                for (std::size_t j = 0; j < k; ++j) mean += phi[j] * y[k - 1 - j];
                y[k] = mean + innovation_sd_[k] * rng.next_normal();
            }
            const double scale = std::pow(grid_[1] - grid_[0], model_.H);
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                acc += scale * y[k];
                values[k + 1] = acc;
            }
        }
        return SamplePath(grid_, std::move(values));
    }

  private:
    void build_cholesky() {
        const std::size_t n = grid_.size() - 1;
        Eigen::MatrixXd cov(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = fbm_covariance(model_, grid_[i + 1], grid_[j + 1]);
                cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
            }

        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) {
            // Rounding can spoil positive definiteness; retry once with jitter.
            const double jitter = 1e-12 * std::pow(grid_.horizon(), 2.0 * model_.H);
            cov.diagonal().array() += jitter;
            llt.compute(cov);
            if (llt.info() != Eigen::Success) throw FactorizationError(failing_pivot(cov));
        }
        chol_ = llt.matrixL();
    }

    // Smallest k such that the leading k x k block is not numerically SPD.
    static std::size_t failing_pivot(const Eigen::MatrixXd& cov) {
        std::size_t lo = 1, hi = static_cast<std::size_t>(cov.rows());
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            Eigen::LLT<Eigen::MatrixXd> llt(
                cov.topLeftCorner(static_cast<Eigen::Index>(mid), static_cast<Eigen::Index>(mid)));
            if (llt.info() == Eigen::Success)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo - 1;  // zero-based pivot
    }

    void build_hosking() {
        const std::size_t n = grid_.size() - 1;
        // Unit-variance fGn autocorrelation.
        std::vector<double> rho(n);
        rho[0] = 1.0;
        const double p = 2.0 * model_.H;
        for (std::size_t k = 1; k < n; ++k)
            rho[k] = 0.5 * (std::pow(static_cast<double>(k + 1), p) -
                            2.0 * std::pow(static_cast<double>(k), p) +
                            std::pow(static_cast<double>(k - 1), p));

        phi_rows_.resize(n * (n - 1) / 2);
        innovation_sd_.resize(n);
        innovation_sd_[0] = 1.0;
        if (n == 1) return;

        std::vector<double> phi_prev(n, 0.0), phi_cur(n, 0.0);
        double v = 1.0;
        for (std::size_t k = 1; k < n; ++k) {
            double num = rho[k];
            for (std::size_t j = 1; j < k; ++j) num -= phi_prev[j] * rho[k - j];
            const double reflec = num / v;
            phi_cur[k] = reflec;
            for (std::size_t j = 1; j < k; ++j) phi_cur[j] = phi_prev[j] - reflec * phi_prev[k - j];
            v *= (1.0 - reflec * reflec);
            if (!(v > 0.0))
                throw FactorizationError(k);  // autocovariance not positive definite numerically

            double* row = &phi_rows_[k * (k - 1) / 2];
            for (std::size_t j = 1; j <= k; ++j) row[j - 1] = phi_cur[j];
            innovation_sd_[k] = std::sqrt(v);
            std::swap(phi_prev, phi_cur);
        }
    }

    HurstModel model_;
    TimeGrid grid_;
    FbmMethod method_;
    Eigen::MatrixXd chol_;                // cholesky factor L (lower)
    std::vector<double> phi_rows_;        // hosking predictor rows, flattened
    std::vector<double> innovation_sd_;   // hosking innovation standard deviations
};

/// One-shot standard FBM path (factorizes per call; Monte Carlo loops should
/// hold an FbmSampler instead).
inline SamplePath simulate_fbm(const HurstModel& model, const TimeGrid& grid, RngSeed seed,
                               FbmMethod method = FbmMethod::cholesky) {
    return FbmSampler(model, grid, method).sample(seed);
}

/// Observation path xi(t_j) = sum_i theta_i phi_i(t_j) + sigma B^H(t_j).
/// The additive form requires constant sigma; time-varying sigma enters
/// only through the transform/estimation route.
inline SamplePath simulate_observation(const std::vector<double>& theta, const DriftBasis& basis,
                                       const HurstModel& model, const TimeGrid& grid, RngSeed seed,
                                       FbmMethod method = FbmMethod::cholesky) {
    if (static_cast<int>(theta.size()) != basis.dimension())
        throw std::invalid_argument("simulate_observation: theta length must match basis dimension");
    if (!basis.sigma_is_constant())
        throw std::invalid_argument(
            "simulate_observation: additive observation form requires constant sigma");

    SamplePath path = simulate_fbm(model, grid, seed, method);
    const double sigma = basis.sigma_const;
    for (std::size_t j = 0; j < path.size(); ++j) {
        double drift = 0.0;
        for (int i = 0; i < basis.dimension(); ++i)
            drift += theta[static_cast<std::size_t>(i)] * basis.phi_at(i, grid, j);
        path.values[j] = drift + sigma * path.values[j];
    }
    return path;
}

/// Same, continuing an existing sampler/stream (harness fast path).
inline SamplePath simulate_observation(const std::vector<double>& theta, const DriftBasis& basis,
                                       const FbmSampler& sampler, Rng& rng) {
    if (static_cast<int>(theta.size()) != basis.dimension())
        throw std::invalid_argument("simulate_observation: theta length must match basis dimension");
    if (!basis.sigma_is_constant())
        throw std::invalid_argument(
            "simulate_observation: additive observation form requires constant sigma");

    SamplePath path = sampler.sample(rng);
    const double sigma = basis.sigma_const;
    for (std::size_t j = 0; j < path.size(); ++j) {
        double drift = 0.0;
        for (int i = 0; i < basis.dimension(); ++i)
            drift += theta[static_cast<std::size_t>(i)] * basis.phi_at(i, sampler.grid(), j);
        path.values[j] = drift + sigma * path.values[j];
    }
    return path;
}

}  // namespace fracdrift
