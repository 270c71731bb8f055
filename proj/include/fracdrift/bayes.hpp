#pragma once

// Bayesian estimation and optimal stopping.
//
// Normal prior: the posterior is normal with precision R_H(t) + Sigma^{-1},
// the stopping problem is deterministic, and the cost curve
// F_H(t) = c t + tr((R_H(t) + Sigma^{-1})^{-1}) is minimized directly.
//
// Uniform prior (scalar drift): the posterior is a truncated normal whose
// mean, variance, and normalizer follow the closed formulas
//
//   est   = mu + [Z P]^{-1} (Lambda(a) - Lambda(b)),
//   gamma = P^{-1} + [Z P]^{-1} [Lambda(a)(a-mu) - Lambda(b)(b-mu)]
//           - ([Z P]^{-1}(Lambda(a) - Lambda(b)))^2,
//   Z     = sqrt(2 pi / P) exp(mu^2 P / 2) [Phi((b-mu) sqrt(P)) - Phi((a-mu) sqrt(P))],
//
// written with precision P = w_H(t)/sigma^2 and location mu = sigma M_t/w_H(t)
// (the unit-sigma case has P = w_H, mu = M/w). All Lambda terms are combined
// in log space with sign tracking, so large-precision instances do not
// overflow. The stopping time is found by backward induction on a
// (time x statistic) lattice, the statistic being M itself: given theta, the
// increment of M over [t, t+dt] is Gaussian with mean (theta/sigma) dw and
// variance dw, and theta integrates against the truncated-normal posterior.
//
// A brute-force quadrature oracle over the generalized Bayes rule
// p(x) Lambda(x) / integral serves as the reference for both closed-form
// branches at dimensions one and two.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracdrift/estimator.hpp"
#include "fracdrift/hurst.hpp"
#include "fracdrift/quadrature.hpp"
#include "fracdrift/special.hpp"
#include "fracdrift/transform.hpp"

namespace fracdrift {

// ---------------------------------------------------------------------------
// Priors and posterior summaries
// ---------------------------------------------------------------------------

struct Prior {
    enum class Kind { normal, uniform };

    Kind kind = Kind::normal;
    Eigen::VectorXd mean;     // normal
    Eigen::MatrixXd cov;      // normal, symmetric positive definite
    Eigen::VectorXd lo, hi;   // uniform box, lo_i < hi_i

    int dimension() const {
        return kind == Kind::normal ? static_cast<int>(mean.size()) : static_cast<int>(lo.size());
    }
};

inline Prior make_normal_prior(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
        throw std::invalid_argument("make_normal_prior: covariance shape mismatch");
    if (!cov.isApprox(cov.transpose(), 1e-12))
        throw std::invalid_argument("make_normal_prior: covariance must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("make_normal_prior: covariance must be positive definite");
    Prior p;
    p.kind = Prior::Kind::normal;
    p.mean = std::move(mean);
    p.cov = std::move(cov);
    return p;
}

inline Prior make_uniform_prior(Eigen::VectorXd lo, Eigen::VectorXd hi) {
    if (lo.size() != hi.size()) throw std::invalid_argument("make_uniform_prior: box shape mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (!(lo[i] < hi[i])) throw std::invalid_argument("make_uniform_prior: requires lo < hi per index");
    Prior p;
    p.kind = Prior::Kind::uniform;
    p.lo = std::move(lo);
    p.hi = std::move(hi);
    return p;
}

struct PosteriorSummary {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    double mse_trace = 0.0;
    double t = 0.0;
};

// ---------------------------------------------------------------------------
// Normal prior: conjugate posterior and deterministic stopping
// ---------------------------------------------------------------------------

/// Posterior mean (R + Sigma^{-1})^{-1} (psiH + Sigma^{-1} m) and covariance
/// (R + Sigma^{-1})^{-1}. The prior must already be restricted to the index
/// set of the Gram matrix (see condition_normal_prior for the exactly
/// observed constant term).
inline PosteriorSummary normal_posterior(const Prior& prior, const GramMatrix& gram,
                                         const ScoreVector& score) {
    if (prior.kind != Prior::Kind::normal)
        throw std::invalid_argument("normal_posterior: normal prior required");
    const Eigen::Index d = gram.R.rows();
    if (prior.dimension() != d || score.psiH.size() != d)
        throw std::invalid_argument("normal_posterior: dimension mismatch");

    Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.cov);
    if (prior_llt.info() != Eigen::Success)
        throw std::invalid_argument("normal_posterior: prior covariance must be positive definite");
    const Eigen::MatrixXd prior_prec = prior_llt.solve(Eigen::MatrixXd::Identity(d, d));

    const Eigen::MatrixXd A = gram.R + prior_prec;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("normal_posterior: posterior precision not positive definite");

    PosteriorSummary out;
    out.t = gram.t;
    out.mean = llt.solve(score.psiH + prior_prec * prior.mean);
    out.covariance = llt.solve(Eigen::MatrixXd::Identity(d, d));
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose().eval());
    out.mse_trace = out.covariance.trace();
    return out;
}

/// Gaussian conditioning of a normal prior on theta_index = value; returns
/// the prior over the remaining indices (order preserved). Used for the
/// polynomial constant term, which xi(0) observes exactly.
inline Prior condition_normal_prior(const Prior& prior, int index, double value) {
    if (prior.kind != Prior::Kind::normal)
        throw std::invalid_argument("condition_normal_prior: normal prior required");
    const int d = prior.dimension();
    if (index < 0 || index >= d) throw std::invalid_argument("condition_normal_prior: index out of range");
    if (d == 1) throw std::invalid_argument("condition_normal_prior: nothing left to condition");

    std::vector<int> rest;
    for (int i = 0; i < d; ++i)
        if (i != index) rest.push_back(i);

    const double s00 = prior.cov(index, index);
    Eigen::VectorXd m(d - 1);
    Eigen::MatrixXd c(d - 1, d - 1);
    for (int a = 0; a < d - 1; ++a) {
        m[a] = prior.mean[rest[static_cast<std::size_t>(a)]] +
               prior.cov(rest[static_cast<std::size_t>(a)], index) / s00 *
                   (value - prior.mean[index]);
        for (int b = 0; b < d - 1; ++b)
            c(a, b) = prior.cov(rest[static_cast<std::size_t>(a)], rest[static_cast<std::size_t>(b)]) -
                      prior.cov(rest[static_cast<std::size_t>(a)], index) *
                          prior.cov(index, rest[static_cast<std::size_t>(b)]) / s00;
    }
    c = 0.5 * (c + c.transpose().eval());
    return make_normal_prior(std::move(m), std::move(c));
}

struct CostCurve {
    std::vector<double> t;
    std::vector<double> F;
};

/// F_H(t) = c t + tr((R_H(t) + Sigma^{-1})^{-1}) sampled on the grid, over
/// the full basis dimension (unidentifiable rows of R are zero, so their
/// prior variance enters the trace unchanged); F_H(0) = tr(Sigma).
inline CostCurve normal_cost_curve(const Prior& prior, const PsiEvaluations& psi,
                                   const HurstModel& model, double c, const TimeGrid& grid) {
    if (prior.kind != Prior::Kind::normal)
        throw std::invalid_argument("normal_cost_curve: normal prior required");
    if (!(c >= 0.0)) throw std::invalid_argument("normal_cost_curve: cost must be nonnegative");
    const int d = psi.dimension();
    if (prior.dimension() != d)
        throw std::invalid_argument("normal_cost_curve: prior dimension must match the basis");
    if (!grid.same_as(psi.grid))
        throw std::invalid_argument("normal_cost_curve: psi rows must be sampled on the given grid");

    Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.cov);
    const Eigen::MatrixXd prior_prec = prior_llt.solve(Eigen::MatrixXd::Identity(d, d));

    CostCurve out;
    out.t = grid.points();
    out.F.resize(grid.size());

    const bool closed = psi.closed_form;
    std::vector<double> w(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) w[k] = weight_w(model, grid[k]);

    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (closed) {
            R = gram_matrix_poly(model, d - 1, psi.sigma_const, grid[k]);
        } else if (k > 0) {
            for (int a = 0; a < d; ++a)
                for (int b = a; b < d; ++b) {
                    const double inc = 0.5 *
                                       (psi.psi[static_cast<std::size_t>(a)][k - 1] *
                                            psi.psi[static_cast<std::size_t>(b)][k - 1] +
                                        psi.psi[static_cast<std::size_t>(a)][k] *
                                            psi.psi[static_cast<std::size_t>(b)][k]) *
                                       (w[k] - w[k - 1]);
                    R(a, b) += inc;
                    if (a != b) R(b, a) += inc;
                }
        }
        const Eigen::MatrixXd A = R + prior_prec;
        out.F[k] = c * grid[k] +
                   Eigen::LLT<Eigen::MatrixXd>(A).solve(Eigen::MatrixXd::Identity(d, d)).trace();
    }
    return out;
}

struct StoppingSolution {
    double tau = std::numeric_limits<double>::quiet_NaN();  // deterministic rule when finite
    double expected_cost = 0.0;
    std::vector<double> times;
    std::vector<double> cost_curve;        // deterministic case
    std::vector<double> statistic;         // lattice values of M (DP case)
    std::vector<std::uint8_t> stop;        // row-major [time][statistic], 1 = stop (DP case)
};

/// Deterministic optimal stop: scan the sampled curve, then refine the
/// bracketing interval by golden-section search on `eval` down to `tol`.
inline StoppingSolution normal_optimal_stop(const CostCurve& curve,
                                            const std::function<double(double)>& eval,
                                            double tol = 1e-6) {
    if (curve.t.size() < 2 || curve.t.size() != curve.F.size())
        throw std::invalid_argument("normal_optimal_stop: need a sampled curve");

    std::size_t best = 0;
    for (std::size_t k = 1; k < curve.F.size(); ++k)
        if (curve.F[k] < curve.F[best]) best = k;

    double lo = curve.t[best > 0 ? best - 1 : 0];
    double hi = curve.t[best + 1 < curve.t.size() ? best + 1 : curve.t.size() - 1];

    double tau = curve.t[best];
    double cost = curve.F[best];
    if (eval && hi > lo) {
        const double invphi = 0.6180339887498949;
        double x1 = hi - invphi * (hi - lo);
        double x2 = lo + invphi * (hi - lo);
        double f1 = eval(x1), f2 = eval(x2);
        while (hi - lo > tol) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - invphi * (hi - lo);
                f1 = eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + invphi * (hi - lo);
                f2 = eval(x2);
            }
        }
        const double mid = 0.5 * (lo + hi);
        const double fmid = eval(mid);
        if (fmid < cost) {
            tau = mid;
            cost = fmid;
        }
    }

    StoppingSolution out;
    out.tau = tau;
    out.expected_cost = cost;
    out.times = curve.t;
    out.cost_curve = curve.F;
    return out;
}

// ---------------------------------------------------------------------------
// Uniform prior, scalar drift
// ---------------------------------------------------------------------------

struct UniformPosterior {
    double estimate = 0.0;
    double mse = 0.0;
    double z = 0.0;      // normalizer Z_t (may overflow to inf for extreme inputs)
    double log_z = 0.0;
};

/// Raised when the likelihood mass of [a, b] underflows entirely (the data
/// pushes the posterior outside the box); names the nearer endpoint.
class DegeneratePosteriorError : public std::runtime_error {
  public:
    DegeneratePosteriorError(double endpoint)
        : std::runtime_error("uniform posterior degenerate: mass collapsed at endpoint " +
                             std::to_string(endpoint)),
          endpoint_(endpoint) {}
    double endpoint() const { return endpoint_; }

  private:
    double endpoint_;
};

inline UniformPosterior uniform_posterior_n1(double a, double b, const MartingalePath& mp,
                                             double sigma, double t) {
    if (!(a < b)) throw std::invalid_argument("uniform_posterior_n1: requires a < b");
    if (!(sigma > 0.0)) throw std::invalid_argument("uniform_posterior_n1: sigma must be positive");
    const std::size_t k = mp.grid.index_of(t);
    if (k == 0) throw std::invalid_argument("uniform_posterior_n1: requires t > 0");

    const double w = mp.w[k];
    const double P = w / (sigma * sigma);
    if (!(P > 0.0)) throw std::runtime_error("uniform_posterior_n1: nonpositive precision");
    const double mu = sigma * mp.m[k];  // sigma M / w
    const double s = 1.0 / std::sqrt(P);

    const double alpha = (a - mu) / s;
    const double beta = (b - mu) / s;
    const double C = 0.5 * (std::erfc(alpha / kSqrt2) - std::erfc(beta / kSqrt2));
    if (!(C > 0.0))
        throw DegeneratePosteriorError(std::abs(mu - a) <= std::abs(mu - b) ? a : b);

    const double log_z = 0.5 * std::log(2.0 * std::numbers::pi / P) + 0.5 * mu * mu * P + std::log(C);
    const double log_p = std::log(P);

    const auto log_lambda = [&](double x) { return P * (x * mu - 0.5 * x * x); };
    const double la = log_lambda(a);
    const double lb = log_lambda(b);

    // [Z P]^{-1} (Lambda(a) - Lambda(b)), log-sum-exp with sign tracking.
    double corr;
    {
        const double hi_l = std::max(la, lb);
        const double d = std::abs(la - lb);
        const double mag = std::exp(hi_l - log_z - log_p) * (-std::expm1(-d));
        corr = (la >= lb) ? mag : -mag;
    }

    // [Z P]^{-1} [Lambda(a)(a - mu) - Lambda(b)(b - mu)]: two signed terms.
    double t2 = 0.0;
    {
        double l1 = -std::numeric_limits<double>::infinity(), s1 = 0.0;
        double l2 = -std::numeric_limits<double>::infinity(), s2 = 0.0;
        if (a != mu) {
            l1 = la + std::log(std::abs(a - mu));
            s1 = (a > mu) ? 1.0 : -1.0;
        }
        if (b != mu) {
            l2 = lb + std::log(std::abs(b - mu));
            s2 = (b > mu) ? -1.0 : 1.0;
        }
        const double lmax = std::max(l1, l2);
        if (std::isfinite(lmax)) {
            const double val = s1 * std::exp(l1 - lmax) + s2 * std::exp(l2 - lmax);
            t2 = val * std::exp(lmax - log_z - log_p);
        }
    }

    UniformPosterior out;
    out.estimate = mu + corr;
    out.mse = std::max(1.0 / P + t2 - corr * corr, 0.0);
    out.log_z = log_z;
    out.z = std::exp(log_z);
    return out;
}

// ---------------------------------------------------------------------------
// Uniform prior: dynamic-programming stopping rule
// ---------------------------------------------------------------------------

struct LatticeSpec {
    int n_bins = 201;       // statistic bins (>= 51)
    int gh_nodes = 15;      // Gauss-Hermite nodes for the Gaussian kernel (>= 3)
    int gl_nodes = 33;      // Gauss-Legendre nodes over theta in [a, b]
    double span_sds = 6.0;  // lattice half-width in units of sqrt(w_H(T))
    // explicit lattice bounds (used to keep bins identical across horizons)
    double m_lo = std::numeric_limits<double>::quiet_NaN();
    double m_hi = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double lattice_interp(const std::vector<double>& bins, const std::vector<double>& v, double x) {
    if (x <= bins.front()) return v.front();
    if (x >= bins.back()) return v.back();
    const double step = (bins.back() - bins.front()) / static_cast<double>(bins.size() - 1);
    const double pos = (x - bins.front()) / step;
    std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= bins.size()) i = bins.size() - 2;
    const double u = pos - static_cast<double>(i);
    return (1.0 - u) * v[i] + u * v[i + 1];
}

}  // namespace detail

/// Backward-induction solution of tau = arg inf E[c tau + gamma_tau] for a
/// uniform prior on [a, b]. Returns the stop/continue policy on the lattice,
/// the value at (t=0, M=0) as expected_cost, and (degenerate priors aside)
/// leaves tau to the first-entry rule under the policy.
inline StoppingSolution uniform_stop_dp(double a, double b, const HurstModel& model, double sigma,
                                        double c, const TimeGrid& grid,
                                        const LatticeSpec& spec = LatticeSpec{}) {
    if (!(c > 0.0)) throw std::invalid_argument("uniform_stop_dp: cost must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("uniform_stop_dp: sigma must be positive");
    if (!(a <= b)) throw std::invalid_argument("uniform_stop_dp: requires a <= b");
    if (grid.size() < 2) throw std::invalid_argument("uniform_stop_dp: grid needs at least one step");
    if (spec.n_bins < 51) throw std::invalid_argument("uniform_stop_dp: lattice too coarse (< 51 bins)");
    if (spec.gh_nodes < 3)
        throw std::invalid_argument("uniform_stop_dp: lattice too coarse (< 3 Gauss-Hermite nodes)");
    if (spec.gl_nodes < 3) throw std::invalid_argument("uniform_stop_dp: need >= 3 Gauss-Legendre nodes");

    const std::size_t K = grid.steps();
    StoppingSolution out;
    out.times = grid.points();

    if (a == b) {  // point-mass prior: nothing to learn, stop immediately
        out.tau = 0.0;
        out.expected_cost = 0.0;
        out.statistic = {0.0};
        out.stop.assign(K + 1, 1);
        return out;
    }

    std::vector<double> w(K + 1);
    for (std::size_t k = 0; k <= K; ++k) w[k] = weight_w(model, grid[k]);
    const double wT = w[K];
    const double sqwT = std::sqrt(wT);

    double lo = spec.m_lo, hi = spec.m_hi;
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        lo = std::min(0.0, wT * a / sigma) - spec.span_sds * sqwT;
        hi = std::max(0.0, wT * b / sigma) + spec.span_sds * sqwT;
    }
    const std::size_t nb = static_cast<std::size_t>(spec.n_bins);
    std::vector<double> bins(nb);
    for (std::size_t i = 0; i < nb; ++i)
        bins[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nb - 1);

    const auto gamma_at = [&](std::size_t k, double M) {
        if (w[k] == 0.0) return (b - a) * (b - a) / 12.0;  // prior variance
        const double P = w[k] / (sigma * sigma);
        return truncated_normal_moments(sigma * M / w[k], 1.0 / std::sqrt(P), a, b).var;
    };

    const QuadRule gl = gauss_legendre(spec.gl_nodes, a, b);
    const QuadRule gh = gauss_hermite(spec.gh_nodes);
    std::vector<double> z_nodes(gh.nodes.size()), z_weights(gh.weights.size());
    {
        double sum = 0.0;
        for (double v : gh.weights) sum += v;
        for (std::size_t r = 0; r < gh.nodes.size(); ++r) {
            z_nodes[r] = kSqrt2 * gh.nodes[r];
            z_weights[r] = gh.weights[r] / sum;
        }
    }

    out.statistic = bins;
    out.stop.assign((K + 1) * nb, 0);
    for (std::size_t i = 0; i < nb; ++i) out.stop[K * nb + i] = 1;  // always stop at T

    std::vector<double> next(nb), cur(nb);
    for (std::size_t i = 0; i < nb; ++i) next[i] = gamma_at(K, bins[i]);

    std::vector<double> lw(gl.nodes.size()), omega(gl.nodes.size());

    const auto continue_value = [&](std::size_t k, double M, double dt, double dw,
                                    double sq_dw) {
        // Posterior over theta at (t_k, M), renormalized on the GL nodes.
        double lmax = -std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const double th = gl.nodes[q];
            lw[q] = th * M / sigma - th * th * w[k] / (2.0 * sigma * sigma);
            lmax = std::max(lmax, lw[q]);
        }
        double norm = 0.0;
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            omega[q] = gl.weights[q] * std::exp(lw[q] - lmax);
            norm += omega[q];
        }
        double acc = 0.0;
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const double drift = M + gl.nodes[q] / sigma * dw;
            double e = 0.0;
            for (std::size_t r = 0; r < z_nodes.size(); ++r)
                e += z_weights[r] * detail::lattice_interp(bins, next, drift + sq_dw * z_nodes[r]);
            acc += omega[q] / norm * e;
        }
        return c * dt + acc;
    };

    double value_at_origin = 0.0;
    for (std::size_t k = K; k-- > 0;) {
        const double dt = grid[k + 1] - grid[k];
        const double dw = w[k + 1] - w[k];
        const double sq_dw = std::sqrt(dw);
        for (std::size_t i = 0; i < nb; ++i) {
            const double g = gamma_at(k, bins[i]);
            const double cont = continue_value(k, bins[i], dt, dw, sq_dw);
            if (g <= cont) {
                cur[i] = g;
                out.stop[k * nb + i] = 1;
            } else {
                cur[i] = cont;
            }
        }
        if (k == 0) {
            // The chain starts at M = 0 exactly; evaluate off-lattice.
            const double g0 = gamma_at(0, 0.0);
            const double cont0 = continue_value(0, 0.0, dt, dw, sq_dw);
            value_at_origin = std::min(g0, cont0);
        }
        std::swap(cur, next);
    }

    out.expected_cost = value_at_origin;
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force posterior oracle (generalized Bayes rule on a tensor grid)
// ---------------------------------------------------------------------------

struct QuadratureSpec {
    std::size_t points_per_dim = 401;  // forced odd for the Simpson rule
    double prior_sds = 8.0;            // normal-prior support half-width
};

/// Normalization, mean, and covariance of p(x) exp(logLambda(x)) by composite
/// Simpson on a tensor grid; dimensions one and two only. Serves as the
/// independent oracle for both closed-form posterior branches.
inline PosteriorSummary quadrature_posterior_oracle(const Prior& prior, const GramMatrix& gram,
                                                    const ScoreVector& score,
                                                    const QuadratureSpec& spec = QuadratureSpec{}) {
    const int d = static_cast<int>(gram.R.rows());
    if (d < 1 || d > 2)
        throw std::invalid_argument("quadrature_posterior_oracle: dimension must be 1 or 2");
    if (prior.dimension() != d || score.psiH.size() != d)
        throw std::invalid_argument("quadrature_posterior_oracle: dimension mismatch");

    std::size_t n = spec.points_per_dim;
    if (n % 2 == 0) ++n;
    if (n < 3) n = 3;

    std::array<double, 2> lo{}, hi{};
    for (int i = 0; i < d; ++i) {
        if (prior.kind == Prior::Kind::uniform) {
            lo[static_cast<std::size_t>(i)] = prior.lo[i];
            hi[static_cast<std::size_t>(i)] = prior.hi[i];
        } else {
            const double sd = std::sqrt(prior.cov(i, i));
            lo[static_cast<std::size_t>(i)] = prior.mean[i] - spec.prior_sds * sd;
            hi[static_cast<std::size_t>(i)] = prior.mean[i] + spec.prior_sds * sd;
        }
    }

    Eigen::MatrixXd prior_prec;
    if (prior.kind == Prior::Kind::normal)
        prior_prec = Eigen::LLT<Eigen::MatrixXd>(prior.cov).solve(Eigen::MatrixXd::Identity(d, d));

    const auto logf = [&](const Eigen::Vector2d& x) {
        double v = 0.0;
        for (int i = 0; i < d; ++i) {
            v += x[i] * score.psiH[i];
            for (int j = 0; j < d; ++j) v -= 0.5 * x[i] * gram.R(i, j) * x[j];
        }
        if (prior.kind == Prior::Kind::normal) {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    v -= 0.5 * (x[i] - prior.mean[i]) * prior_prec(i, j) * (x[j] - prior.mean[j]);
        }
        return v;
    };

    std::vector<std::vector<double>> nodes(static_cast<std::size_t>(d));
    std::vector<std::vector<double>> weights(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        nodes[ii].resize(n);
        for (std::size_t k = 0; k < n; ++k)
            nodes[ii][k] = lo[ii] + (hi[ii] - lo[ii]) * static_cast<double>(k) / static_cast<double>(n - 1);
        weights[ii] = simpson_weights(n, lo[ii], hi[ii]);
    }

    const std::size_t n2 = (d == 2) ? n : 1;

    // Pass 1: peak of the log-integrand for stable exponentiation.
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            Eigen::Vector2d x(nodes[0][i], d == 2 ? nodes[1][j] : 0.0);
            lmax = std::max(lmax, logf(x));
        }

    double z = 0.0;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            Eigen::Vector2d x(nodes[0][i], d == 2 ? nodes[1][j] : 0.0);
            const double wgt = weights[0][i] * (d == 2 ? weights[1][j] : 1.0);
            const double f = wgt * std::exp(logf(x) - lmax);
            z += f;
            mean += f * x;
        }
    mean /= z;

    Eigen::Matrix2d cov2 = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            Eigen::Vector2d x(nodes[0][i], d == 2 ? nodes[1][j] : 0.0);
            const double wgt = weights[0][i] * (d == 2 ? weights[1][j] : 1.0);
            const double f = wgt * std::exp(logf(x) - lmax);
            const Eigen::Vector2d dx = x - mean;
            cov2 += f * dx * dx.transpose();
        }
    cov2 /= z;

    PosteriorSummary out;
    out.t = gram.t;
    out.mean = mean.head(d);
    out.covariance = cov2.topLeftCorner(d, d);
    out.mse_trace = out.covariance.trace();
    return out;
}

}  // namespace fracdrift
