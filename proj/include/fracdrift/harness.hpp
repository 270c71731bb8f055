#pragma once

// Monte Carlo experiment runner. Replications are independent units keyed by
// stream_id = base stream + replication index; accumulation happens in
// replication order after all workers join, so reports are byte-identical
// regardless of worker count.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fracdrift/bayes.hpp"
#include "fracdrift/drift_basis.hpp"
#include "fracdrift/estimator.hpp"
#include "fracdrift/fbm.hpp"
#include "fracdrift/io.hpp"
#include "fracdrift/rng.hpp"
#include "fracdrift/transform.hpp"

namespace fracdrift {

struct ExperimentSpec {
    enum class Estimator { ml, bracket };

    std::string scenario = "scenario";
    HurstModel model;
    DriftBasis basis;           // carries sigma
    TimeGrid grid;
    Estimator estimator = Estimator::ml;
    std::optional<Eigen::VectorXd> truth;  // fixed theta
    std::optional<Prior> prior;            // theta drawn per replication
    int replications = 1;
    RngSeed base_seed;
    FbmMethod method = FbmMethod::cholesky;
    int workers = 1;
};

struct ReportRow {
    std::string scenario;
    std::string statistic;
    double value = 0.0;
    double se = 0.0;
    int n_reps = 0;
};

struct ReplicationFailure {
    int replication = 0;
    std::string message;
};

struct McReport {
    std::vector<ReportRow> rows;
    std::vector<ReplicationFailure> failures;
};

inline std::string report_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    os << "scenario,statistic,value,se,n_reps\n";
    for (const auto& r : rows)
        os << r.scenario << ',' << r.statistic << ',' << fmt17(r.value) << ',' << fmt17(r.se) << ','
           << r.n_reps << '\n';
    return os.str();
}

namespace detail {

struct RepOutcome {
    bool ok = false;
    Eigen::VectorXd theta_hat;
    Eigen::VectorXd theta_true;
    double m_terminal = 0.0;
    std::string error;
};

inline void mean_and_se(const std::vector<double>& xs, double& mean, double& se) {
    const std::size_t n = xs.size();
    mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(n);
    if (n < 2) {
        se = 0.0;
        return;
    }
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

inline void variance_and_se(const std::vector<double>& xs, double& var, double& se) {
    const std::size_t n = xs.size();
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(n);
    var = 0.0;
    for (double v : xs) var += (v - mean) * (v - mean);
    var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
    // Normal-theory standard error of a sample variance.
    se = n > 1 ? var * std::sqrt(2.0 / static_cast<double>(n - 1)) : 0.0;
}

}  // namespace detail

inline McReport run_mc(const ExperimentSpec& spec) {
    if (spec.replications < 1) throw std::invalid_argument("run_mc: replications must be >= 1");
    if (!spec.truth && !spec.prior && spec.estimator == ExperimentSpec::Estimator::ml)
        throw std::invalid_argument("run_mc: ml study needs a truth vector or a prior");
    if (!spec.basis.sigma_is_constant())
        throw std::invalid_argument("run_mc: simulation studies require constant sigma");

    const int dim = spec.basis.dimension();
    const double sigma = spec.basis.sigma_const;
    const double T = spec.grid.horizon();
    const int R = spec.replications;

    const FbmSampler sampler(spec.model, spec.grid, spec.method);
    const MartingaleTransform transform(spec.model, spec.grid, sigma);
    const PsiEvaluations psi =
        (spec.basis.kind == DriftBasis::Kind::polynomial && spec.basis.sigma_is_constant())
            ? psi_closed_poly(spec.model, spec.basis, spec.grid)
            : psi_numeric(spec.model, spec.basis, spec.grid);

    // Drift design matrix phi_i(t_j), shared by every replication.
    Eigen::MatrixXd design(static_cast<Eigen::Index>(spec.grid.size()), dim);
    for (std::size_t j = 0; j < spec.grid.size(); ++j)
        for (int i = 0; i < dim; ++i)
            design(static_cast<Eigen::Index>(j), i) = spec.basis.phi_at(i, spec.grid, j);

    Eigen::MatrixXd prior_chol;  // for normal-prior draws
    if (spec.prior && spec.prior->kind == Prior::Kind::normal)
        prior_chol = Eigen::LLT<Eigen::MatrixXd>(spec.prior->cov).matrixL();

    const auto run_one = [&](int r) {
        detail::RepOutcome out;
        try {
            Rng rng(spec.base_seed.offset(static_cast<std::uint64_t>(r)));

            Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
            if (spec.truth) {
                theta = *spec.truth;
            } else if (spec.prior) {
                if (spec.prior->kind == Prior::Kind::normal) {
                    Eigen::VectorXd z(dim);
                    for (int i = 0; i < dim; ++i) z[i] = rng.next_normal();
                    theta = spec.prior->mean + prior_chol * z;
                } else {
                    for (int i = 0; i < dim; ++i)
                        theta[i] = rng.next_uniform(spec.prior->lo[i], spec.prior->hi[i]);
                }
            }

            SamplePath path = sampler.sample(rng);
            for (std::size_t j = 0; j < path.size(); ++j)
                path.values[j] =
                    design.row(static_cast<Eigen::Index>(j)).dot(theta) + sigma * path.values[j];

            const MartingalePath mp = transform.apply(path);
            out.theta_true = theta;
            out.m_terminal = mp.M.back();
            if (spec.estimator == ExperimentSpec::Estimator::ml) {
                EstimationResult est = mle_estimate(psi, spec.model, mp, T);
                out.theta_hat = est.theta_hat;
            }
            out.ok = true;
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
        }
        return out;
    };

    std::vector<detail::RepOutcome> results(static_cast<std::size_t>(R));
    const int workers = std::max(1, spec.workers);
    if (workers == 1) {
        for (int r = 0; r < R; ++r) results[static_cast<std::size_t>(r)] = run_one(r);
    } else {
        std::atomic<int> next{0};
        auto body = [&] {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= R) break;
                results[static_cast<std::size_t>(r)] = run_one(r);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }

    McReport report;
    std::vector<int> ok_indices;
    for (int r = 0; r < R; ++r) {
        if (results[static_cast<std::size_t>(r)].ok)
            ok_indices.push_back(r);
        else
            report.failures.push_back({r, results[static_cast<std::size_t>(r)].error});
    }
    if (report.failures.size() * 100 > static_cast<std::size_t>(R))
        throw std::runtime_error("run_mc: more than 1% of replications failed (first: replication " +
                                 std::to_string(report.failures.front().replication) + ": " +
                                 report.failures.front().message + ")");
    const int n_ok = static_cast<int>(ok_indices.size());
    if (n_ok == 0) throw std::runtime_error("run_mc: no successful replication");

    const auto push = [&](const std::string& stat, double value, double se) {
        report.rows.push_back({spec.scenario, stat, value, se, n_ok});
    };

    if (spec.estimator == ExperimentSpec::Estimator::bracket) {
        std::vector<double> mt;
        mt.reserve(static_cast<std::size_t>(n_ok));
        for (int r : ok_indices) mt.push_back(results[static_cast<std::size_t>(r)].m_terminal);
        double mean, se_mean, var, se_var;
        detail::mean_and_se(mt, mean, se_mean);
        detail::variance_and_se(mt, var, se_var);
        push("mean_M_T", mean, se_mean);
        push("var_M_T", var, se_var);
        push("w_H_T", weight_w(spec.model, T), 0.0);
    } else {
        for (int i = 0; i < dim; ++i) {
            std::vector<double> est, err, sq;
            est.reserve(static_cast<std::size_t>(n_ok));
            for (int r : ok_indices) {
                const auto& res = results[static_cast<std::size_t>(r)];
                if (!std::isfinite(res.theta_hat[i])) continue;
                est.push_back(res.theta_hat[i]);
                err.push_back(res.theta_hat[i] - res.theta_true[i]);
                sq.push_back(err.back() * err.back());
            }
            if (est.empty()) continue;  // index not estimated by this basis
            double mean, se_mean, bias, se_bias, mse, se_mse, var, se_var;
            detail::mean_and_se(est, mean, se_mean);
            detail::mean_and_se(err, bias, se_bias);
            detail::mean_and_se(sq, mse, se_mse);
            detail::variance_and_se(est, var, se_var);
            const std::string sfx = "_theta_" + std::to_string(i);
            push("mean" + sfx, mean, se_mean);
            push("bias" + sfx, bias, se_bias);
            push("var" + sfx, var, se_var);
            push("mse" + sfx, mse, se_mse);
        }
    }
    push("failures", static_cast<double>(report.failures.size()), 0.0);
    return report;
}

// ---------------------------------------------------------------------------
// Cost-figure reproduction (normal prior, polynomial drift)
// ---------------------------------------------------------------------------

struct CostFigure {
    CostCurve curve;
    StoppingSolution solution;
    int sign_changes = 0;  // of the forward differences of F along the grid
    bool unimodal = false;
};

inline CostFigure reproduce_cost_figure(double H, int degree, double c, const Prior& prior,
                                        const TimeGrid& grid, double sigma = 1.0) {
    const HurstModel model = make_hurst_model(H);
    const DriftBasis basis = polynomial_basis(degree, sigma);
    const PsiEvaluations psi = psi_closed_poly(model, basis, grid);

    CostFigure out;
    out.curve = normal_cost_curve(prior, psi, model, c, grid);

    Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.cov);
    const Eigen::MatrixXd prior_prec =
        prior_llt.solve(Eigen::MatrixXd::Identity(prior.dimension(), prior.dimension()));
    const auto eval = [&, model, degree, sigma, c](double t) {
        const Eigen::MatrixXd A = gram_matrix_poly(model, degree, sigma, t) + prior_prec;
        return c * t + Eigen::LLT<Eigen::MatrixXd>(A)
                           .solve(Eigen::MatrixXd::Identity(A.rows(), A.cols()))
                           .trace();
    };
    out.solution = normal_optimal_stop(out.curve, eval, 1e-8 * grid.horizon());

    int changes = 0;
    int last_sign = 0;
    for (std::size_t k = 0; k + 1 < out.curve.F.size(); ++k) {
        const double d = out.curve.F[k + 1] - out.curve.F[k];
        const int s = (d > 0.0) - (d < 0.0);
        if (s != 0 && last_sign != 0 && s != last_sign) ++changes;
        if (s != 0) last_sign = s;
    }
    out.sign_changes = changes;
    out.unimodal = (changes == 1);
    return out;
}

// ---------------------------------------------------------------------------
// Fixed-time stopping costs under the uniform prior (Monte Carlo), the
// benchmark that the dynamic-programming rule must not lose to.
// ---------------------------------------------------------------------------

struct FixedTimeCosts {
    std::vector<double> times;
    std::vector<double> mean_cost;  // E[c t_k + gamma_{t_k}]
    std::vector<double> se;
    double best_cost = 0.0;
    double best_se = 0.0;
    double best_time = 0.0;
};

inline FixedTimeCosts uniform_fixed_time_costs(double a, double b, const HurstModel& model,
                                               double sigma, double c, const TimeGrid& grid,
                                               int replications, RngSeed base_seed,
                                               int workers = 1) {
    if (!(a < b)) throw std::invalid_argument("uniform_fixed_time_costs: requires a < b");
    const std::size_t n = grid.size();
    const FbmSampler sampler(model, grid);
    const MartingaleTransform transform(model, grid, sigma);

    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) w[k] = weight_w(model, grid[k]);

    const int R = replications;
    std::vector<std::vector<double>> costs(static_cast<std::size_t>(R));
    const auto run_one = [&](int r) {
        Rng rng(base_seed.offset(static_cast<std::uint64_t>(r)));
        const double theta = rng.next_uniform(a, b);
        SamplePath path = sampler.sample(rng);
        for (std::size_t j = 0; j < n; ++j)
            path.values[j] = theta * grid[j] + sigma * path.values[j];
        const MartingalePath mp = transform.apply(path);

        std::vector<double> row(n);
        row[0] = (b - a) * (b - a) / 12.0;  // stop immediately: prior variance
        for (std::size_t k = 1; k < n; ++k) {
            const double P = w[k] / (sigma * sigma);
            const double gamma =
                truncated_normal_moments(sigma * mp.m[k], 1.0 / std::sqrt(P), a, b).var;
            row[k] = c * grid[k] + gamma;
        }
        costs[static_cast<std::size_t>(r)] = std::move(row);
    };

    const int nw = std::max(1, workers);
    if (nw == 1) {
        for (int r = 0; r < R; ++r) run_one(r);
    } else {
        std::atomic<int> next{0};
        auto body = [&] {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= R) break;
                run_one(r);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < nw; ++i) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }

    FixedTimeCosts out;
    out.times = grid.points();
    out.mean_cost.resize(n);
    out.se.resize(n);
    std::vector<double> col(static_cast<std::size_t>(R));
    for (std::size_t k = 0; k < n; ++k) {
        for (int r = 0; r < R; ++r) col[static_cast<std::size_t>(r)] = costs[static_cast<std::size_t>(r)][k];
        detail::mean_and_se(col, out.mean_cost[k], out.se[k]);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (out.mean_cost[k] < out.mean_cost[best]) best = k;
    out.best_cost = out.mean_cost[best];
    out.best_se = out.se[best];
    out.best_time = out.times[best];
    return out;
}

}  // namespace fracdrift
