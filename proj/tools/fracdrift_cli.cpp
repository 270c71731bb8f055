// fracdrift — command-line front end for simulation, martingale transforms,
// drift estimation, optimal stopping, and Monte Carlo studies of fractional
// Brownian observation models.
//
// Conventions: JSON configs (strictly validated, unknown keys rejected with
// the offending JSON path), CSV bulk output with 17-significant-digit floats,
// JSON scalar summaries, atomic file writes. Exit codes: 0 success,
// 1 runtime/numerical error, 2 usage/config error.
//
// All randomness flows from the config seed: each subcommand works with the
// effective seed (seed XOR hash(command)) and stream ids 0, 1, 2, ... so that
// Monte Carlo replication r is keyed by (seed, command, r).

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fracdrift/fracdrift.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fracdrift;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Strict config parsing
// ---------------------------------------------------------------------------

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError("unknown key '" + (path.empty() ? item.key() : path + "." + item.key()) +
                              "'");
}

const json* find(const json& obj, const std::string& key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError("'" + path + "' must be a number");
    return v.get<double>();
}

double get_number(const json& obj, const std::string& path, const std::string& key) {
    const json* v = find(obj, key);
    if (!v) throw ConfigError("missing key '" + path + "." + key + "'");
    return as_number(*v, path + "." + key);
}

std::int64_t get_integer(const json& obj, const std::string& path, const std::string& key,
                         std::int64_t fallback, bool required = false) {
    const json* v = find(obj, key);
    if (!v) {
        if (required) throw ConfigError("missing key '" + path + "." + key + "'");
        return fallback;
    }
    if (!v->is_number_integer()) throw ConfigError("'" + path + "." + key + "' must be an integer");
    return v->get<std::int64_t>();
}

std::vector<double> get_vector(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError("'" + path + "' must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path));
    return out;
}

struct RunConfig {
    double H = 0.5, sigma = 1.0, T = 1.0;
    int N = 512;

    bool basis_polynomial = true;
    int degree = 1;
    std::string basis_table;

    std::optional<std::vector<double>> theta;
    std::optional<Prior> prior;

    double cost = 0.02;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::string input;
    int replications = 100;
    std::string estimator = "ml";
    int workers = 1;
    FbmMethod method = FbmMethod::cholesky;
    double time = std::numeric_limits<double>::quiet_NaN();
    bool trajectory = false;
    LatticeSpec lattice;
    int oracle_points = 401;

    TimeGrid grid() const { return TimeGrid::uniform(T, static_cast<std::size_t>(N)); }
    HurstModel model() const { return make_hurst_model(H); }
    DriftBasis basis() const {
        if (basis_polynomial) return polynomial_basis(degree, sigma);
        return read_tabulated_basis_csv(basis_table, sigma);
    }
    double at_time() const { return std::isnan(time) ? T : time; }
};

RunConfig load_config(const fs::path& file) {
    std::ifstream is(file);
    if (!is) throw ConfigError("cannot open config file " + file.string());
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");

    check_keys(doc, "", {"model", "basis", "truth", "prior", "cost", "seed", "stream", "input",
                         "replications", "estimator", "workers", "method", "time", "trajectory",
                         "lattice", "oracle_points"});
    RunConfig cfg;

    if (const json* model = find(doc, "model")) {
        check_keys(*model, "model", {"H", "sigma", "T", "N"});
        cfg.H = get_number(*model, "model", "H");
        if (!(cfg.H > 0.0 && cfg.H < 1.0)) throw ConfigError("'model.H' must lie in (0, 1)");
        if (const json* s = find(*model, "sigma")) {
            cfg.sigma = as_number(*s, "model.sigma");
            if (!(cfg.sigma > 0.0)) throw ConfigError("'model.sigma' must be positive");
        }
        if (const json* t = find(*model, "T")) {
            cfg.T = as_number(*t, "model.T");
            if (!(cfg.T > 0.0)) throw ConfigError("'model.T' must be positive");
        }
        cfg.N = static_cast<int>(get_integer(*model, "model", "N", cfg.N));
        if (cfg.N < 1) throw ConfigError("'model.N' must be at least 1");
    } else {
        throw ConfigError("missing key 'model'");
    }

    if (const json* basis = find(doc, "basis")) {
        check_keys(*basis, "basis", {"kind", "degree", "table"});
        const json* kind = find(*basis, "kind");
        if (!kind || !kind->is_string()) throw ConfigError("'basis.kind' must be a string");
        const std::string k = kind->get<std::string>();
        if (k == "polynomial") {
            cfg.basis_polynomial = true;
            cfg.degree = static_cast<int>(get_integer(*basis, "basis", "degree", 1, true));
            if (cfg.degree < 0) throw ConfigError("'basis.degree' must be nonnegative");
        } else if (k == "tabulated") {
            cfg.basis_polynomial = false;
            const json* table = find(*basis, "table");
            if (!table || !table->is_string())
                throw ConfigError("'basis.table' must be a path string");
            cfg.basis_table = table->get<std::string>();
        } else {
            throw ConfigError("'basis.kind' must be 'polynomial' or 'tabulated'");
        }
    }

    if (const json* truth = find(doc, "truth")) {
        check_keys(*truth, "truth", {"theta"});
        const json* th = find(*truth, "theta");
        if (!th) throw ConfigError("missing key 'truth.theta'");
        cfg.theta = get_vector(*th, "truth.theta");
    }

    if (const json* prior = find(doc, "prior")) {
        check_keys(*prior, "prior", {"normal", "uniform"});
        const json* normal = find(*prior, "normal");
        const json* uniform = find(*prior, "uniform");
        if ((normal != nullptr) == (uniform != nullptr))
            throw ConfigError("'prior' must contain exactly one of 'normal' or 'uniform'");
        if (normal) {
            check_keys(*normal, "prior.normal", {"mean", "cov"});
            const json* mean = find(*normal, "mean");
            const json* cov = find(*normal, "cov");
            if (!mean || !cov) throw ConfigError("'prior.normal' needs 'mean' and 'cov'");
            const auto mvec = get_vector(*mean, "prior.normal.mean");
            if (!cov->is_array() || cov->size() != mvec.size())
                throw ConfigError("'prior.normal.cov' must be a square matrix matching 'mean'");
            Eigen::VectorXd m(static_cast<Eigen::Index>(mvec.size()));
            Eigen::MatrixXd C(static_cast<Eigen::Index>(mvec.size()),
                              static_cast<Eigen::Index>(mvec.size()));
            for (std::size_t i = 0; i < mvec.size(); ++i) {
                m[static_cast<Eigen::Index>(i)] = mvec[i];
                const auto row = get_vector((*cov)[i], "prior.normal.cov");
                if (row.size() != mvec.size())
                    throw ConfigError("'prior.normal.cov' must be a square matrix matching 'mean'");
                for (std::size_t j = 0; j < row.size(); ++j)
                    C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
            }
            try {
                cfg.prior = make_normal_prior(std::move(m), std::move(C));
            } catch (const std::invalid_argument& e) {
                throw ConfigError("'prior.normal': " + std::string(e.what()));
            }
        } else {
            check_keys(*uniform, "prior.uniform", {"a", "b"});
            const double a = get_number(*uniform, "prior.uniform", "a");
            const double b = get_number(*uniform, "prior.uniform", "b");
            if (!(a <= b)) throw ConfigError("'prior.uniform' requires a <= b");
            Eigen::VectorXd lo = Eigen::VectorXd::Constant(1, a);
            Eigen::VectorXd hi = Eigen::VectorXd::Constant(1, b);
            if (a == b) {  // degenerate box kept representable for stop-uniform
                Prior p;
                p.kind = Prior::Kind::uniform;
                p.lo = lo;
                p.hi = hi;
                cfg.prior = p;
            } else {
                cfg.prior = make_uniform_prior(std::move(lo), std::move(hi));
            }
        }
    }

    if (const json* c = find(doc, "cost")) {
        cfg.cost = as_number(*c, "cost");
        if (cfg.cost < 0.0) throw ConfigError("'cost' must be nonnegative");
    }
    if (const json* s = find(doc, "seed")) {
        if (!s->is_number_unsigned() && !s->is_number_integer())
            throw ConfigError("'seed' must be an integer");
        cfg.seed = s->get<std::uint64_t>();
    }
    cfg.stream = static_cast<std::uint64_t>(get_integer(doc, "", "stream", 0));
    if (const json* in = find(doc, "input")) {
        if (!in->is_string()) throw ConfigError("'input' must be a path string");
        cfg.input = in->get<std::string>();
    }
    cfg.replications = static_cast<int>(get_integer(doc, "", "replications", cfg.replications));
    if (cfg.replications < 1) throw ConfigError("'replications' must be at least 1");
    if (const json* est = find(doc, "estimator")) {
        if (!est->is_string()) throw ConfigError("'estimator' must be a string");
        cfg.estimator = est->get<std::string>();
        if (cfg.estimator != "ml" && cfg.estimator != "bracket")
            throw ConfigError("'estimator' must be 'ml' or 'bracket'");
    }
    cfg.workers = static_cast<int>(get_integer(doc, "", "workers", 1));
    if (cfg.workers < 1) throw ConfigError("'workers' must be at least 1");
    if (const json* method = find(doc, "method")) {
        if (!method->is_string()) throw ConfigError("'method' must be a string");
        const std::string m = method->get<std::string>();
        if (m == "cholesky")
            cfg.method = FbmMethod::cholesky;
        else if (m == "hosking")
            cfg.method = FbmMethod::hosking;
        else
            throw ConfigError("'method' must be 'cholesky' or 'hosking'");
    }
    if (const json* t = find(doc, "time")) {
        cfg.time = as_number(*t, "time");
        if (!(cfg.time > 0.0)) throw ConfigError("'time' must be positive");
    }
    if (const json* tr = find(doc, "trajectory")) {
        if (!tr->is_boolean()) throw ConfigError("'trajectory' must be a boolean");
        cfg.trajectory = tr->get<bool>();
    }
    if (const json* lat = find(doc, "lattice")) {
        check_keys(*lat, "lattice", {"bins", "gh", "gl", "span"});
        cfg.lattice.n_bins = static_cast<int>(get_integer(*lat, "lattice", "bins", 201));
        cfg.lattice.gh_nodes = static_cast<int>(get_integer(*lat, "lattice", "gh", 15));
        cfg.lattice.gl_nodes = static_cast<int>(get_integer(*lat, "lattice", "gl", 33));
        if (const json* span = find(*lat, "span")) cfg.lattice.span_sds = as_number(*span, "lattice.span");
    }
    cfg.oracle_points = static_cast<int>(get_integer(doc, "", "oracle_points", 401));
    if (cfg.oracle_points < 3) throw ConfigError("'oracle_points' must be at least 3");

    return cfg;
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

struct OutputContext {
    fs::path out_dir;
    std::string format = "json";  // summary format

    fs::path target(const std::string& name) const { return out_dir / name; }

    void write_summary(const json& summary) const {
        if (format == "csv") {
            std::string text = "key,value\n";
            for (const auto& item : summary.items())
                text += item.key() + "," + item.value().dump() + "\n";
            atomic_write_text(target("summary.csv"), text);
        } else {
            atomic_write_text(target("summary.json"), summary.dump(2) + "\n");
        }
    }
};

std::uint64_t effective_seed(const RunConfig& cfg, const char* command,
                             const std::optional<std::uint64_t>& override_seed) {
    const std::uint64_t base = override_seed.value_or(cfg.seed);
    return base ^ fnv1a64(command);
}

json json_vector(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

json json_matrix(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

// (theta_0 observed exactly at t = 0, remaining block per the conjugate
// posterior; used by estimate-bayes with a normal prior)
PosteriorSummary bayes_normal_pipeline(const RunConfig& cfg, const Prior& prior,
                                       const PsiEvaluations& psi, const MartingalePath& mp,
                                       double at) {
    const HurstModel model = cfg.model();
    const GramMatrix gram = gram_matrix(psi, model, at);
    const ScoreVector score = score_vector(psi, mp, at);

    const int dim = psi.dimension();
    if (prior.dimension() != dim)
        throw ConfigError("'prior.normal' dimension must match the basis dimension (" +
                          std::to_string(dim) + ")");

    const bool constant_masked = psi.from_polynomial && !psi.identifiable[0];
    Prior reduced = prior;
    if (constant_masked) {
        if (dim == 1) {
            // only the constant term: posterior is the point mass at xi(0)
            PosteriorSummary ps;
            ps.t = at;
            ps.mean = Eigen::VectorXd::Constant(1, mp.xi0);
            ps.covariance = Eigen::MatrixXd::Zero(1, 1);
            ps.mse_trace = 0.0;
            return ps;
        }
        reduced = condition_normal_prior(prior, 0, mp.xi0);
    }
    const PosteriorSummary block = normal_posterior(reduced, gram, score);

    if (!constant_masked) return block;

    PosteriorSummary full;
    full.t = block.t;
    full.mean = Eigen::VectorXd::Zero(dim);
    full.covariance = Eigen::MatrixXd::Zero(dim, dim);
    full.mean[0] = mp.xi0;
    for (int a = 1; a < dim; ++a) {
        full.mean[a] = block.mean[a - 1];
        for (int b = 1; b < dim; ++b) full.covariance(a, b) = block.covariance(a - 1, b - 1);
    }
    full.mse_trace = block.mse_trace;
    return full;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, const OutputContext& out, std::uint64_t seed) {
    const HurstModel model = cfg.model();
    const TimeGrid grid = cfg.grid();
    const DriftBasis basis = cfg.basis();
    std::vector<double> theta(static_cast<std::size_t>(basis.dimension()), 0.0);
    if (cfg.theta) {
        if (cfg.theta->size() != theta.size())
            throw ConfigError("'truth.theta' length must equal the basis dimension");
        theta = *cfg.theta;
    }
    const SamplePath xi =
        simulate_observation(theta, basis, model, grid, RngSeed{seed, cfg.stream}, cfg.method);
    atomic_write_text(out.target("path.csv"), sample_path_csv(xi));

    // increment sanity summary (informative log, not an acceptance gate)
    std::vector<double> inc(grid.size() - 1);
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) inc[j] = xi.values[j + 1] - xi.values[j];
    double mean = 0.0;
    for (double v : inc) mean += v;
    mean /= static_cast<double>(inc.size());
    double var = 0.0, skew = 0.0, kurt = 0.0;
    for (double v : inc) var += (v - mean) * (v - mean);
    var /= static_cast<double>(inc.size() - 1);
    const double sd = std::sqrt(var);
    for (double v : inc) {
        const double z = (v - mean) / sd;
        skew += z * z * z;
        kurt += z * z * z * z;
    }
    skew /= static_cast<double>(inc.size());
    kurt = kurt / static_cast<double>(inc.size()) - 3.0;
    std::cout << "simulate: wrote " << out.target("path.csv").string() << "\n"
              << "increment summary: mean " << fmt17(mean) << ", sd " << fmt17(sd) << ", skew "
              << fmt17(skew) << ", excess kurtosis " << fmt17(kurt)
              << (std::abs(skew) < 0.6 && std::abs(kurt) < 1.5 ? " (normality sanity ok)" : "")
              << "\n";

    out.write_summary(json{{"command", "simulate"},
                           {"H", cfg.H},
                           {"sigma", cfg.sigma},
                           {"T", cfg.T},
                           {"N", cfg.N},
                           {"seed", seed},
                           {"stream", cfg.stream},
                           {"increment_mean", mean},
                           {"increment_sd", sd},
                           {"increment_skew", skew},
                           {"increment_excess_kurtosis", kurt}});
    return 0;
}

int cmd_transform(const RunConfig& cfg, const OutputContext& out) {
    if (cfg.input.empty()) throw ConfigError("missing key 'input' (observation CSV)");
    const SamplePath xi = read_sample_path_csv(cfg.input);
    const MartingalePath mp = martingale_transform(xi, cfg.sigma, cfg.model());
    atomic_write_text(out.target("martingale.csv"), martingale_csv(mp));
    out.write_summary(json{{"command", "transform"},
                           {"H", cfg.H},
                           {"sigma", cfg.sigma},
                           {"M_T", mp.M.back()},
                           {"w_T", mp.w.back()},
                           {"m_T", mp.m.back()}});
    std::cout << "transform: wrote " << out.target("martingale.csv").string() << "\n";
    return 0;
}

int cmd_estimate_ml(const RunConfig& cfg, const OutputContext& out) {
    if (cfg.input.empty()) throw ConfigError("missing key 'input' (observation CSV)");
    const HurstModel model = cfg.model();
    const SamplePath xi = read_sample_path_csv(cfg.input);
    const DriftBasis basis = cfg.basis();
    const PsiEvaluations psi = basis.kind == DriftBasis::Kind::polynomial && basis.sigma_is_constant()
                                   ? psi_closed_poly(model, basis, xi.grid)
                                   : psi_numeric(model, basis, xi.grid);
    const MartingalePath mp = martingale_transform(xi, cfg.sigma, model);
    const EstimationResult est = mle_estimate(psi, model, mp, cfg.at_time());

    json theta = json::array();
    for (Eigen::Index i = 0; i < est.theta_hat.size(); ++i) theta.push_back(est.theta_hat[i]);
    out.write_summary(json{{"command", "estimate-ml"},
                           {"t", est.t},
                           {"theta_hat", theta},
                           {"condition", est.info.condition_estimate}});
    std::cout << "estimate-ml: theta_hat =";
    for (Eigen::Index i = 0; i < est.theta_hat.size(); ++i) std::cout << ' ' << fmt17(est.theta_hat[i]);
    std::cout << "\n";

    if (cfg.trajectory) {
        const auto traj = estimate_trajectory(psi, model, mp);
        atomic_write_text(out.target("trajectory.csv"), trajectory_csv(traj, psi.dimension()));
        std::cout << "estimate-ml: wrote " << out.target("trajectory.csv").string() << "\n";
    }
    return 0;
}

int cmd_estimate_bayes(const RunConfig& cfg, const OutputContext& out) {
    if (cfg.input.empty()) throw ConfigError("missing key 'input' (observation CSV)");
    if (!cfg.prior) throw ConfigError("missing key 'prior'");
    const HurstModel model = cfg.model();
    const SamplePath xi = read_sample_path_csv(cfg.input);
    const MartingalePath mp = martingale_transform(xi, cfg.sigma, model);
    const double at = cfg.at_time();

    PosteriorSummary ps;
    if (cfg.prior->kind == Prior::Kind::normal) {
        const DriftBasis basis = cfg.basis();
        const PsiEvaluations psi =
            basis.kind == DriftBasis::Kind::polynomial && basis.sigma_is_constant()
                ? psi_closed_poly(model, basis, xi.grid)
                : psi_numeric(model, basis, xi.grid);
        ps = bayes_normal_pipeline(cfg, *cfg.prior, psi, mp, at);
    } else {
        // scalar linear-drift model: theta_0 observed at t = 0, theta_1 ~ U(a, b)
        const double a = cfg.prior->lo[0], b = cfg.prior->hi[0];
        if (!(a < b)) throw ConfigError("'prior.uniform' requires a < b for estimation");
        const UniformPosterior up = uniform_posterior_n1(a, b, mp, cfg.sigma, at);
        ps.t = at;
        ps.mean = Eigen::VectorXd::Zero(2);
        ps.covariance = Eigen::MatrixXd::Zero(2, 2);
        ps.mean[0] = mp.xi0;
        ps.mean[1] = up.estimate;
        ps.covariance(1, 1) = up.mse;
        ps.mse_trace = up.mse;
    }

    atomic_write_text(out.target("posterior.json"), posterior_summary_json(ps));
    out.write_summary(json{{"command", "estimate-bayes"},
                           {"t", ps.t},
                           {"mean", json_vector(ps.mean)},
                           {"cov", json_matrix(ps.covariance)},
                           {"mse_trace", ps.mse_trace}});
    std::cout << "estimate-bayes: wrote " << out.target("posterior.json").string() << "\n";
    return 0;
}

int cmd_cost_curve(const RunConfig& cfg, const OutputContext& out, bool refine_stop) {
    if (!cfg.prior || cfg.prior->kind != Prior::Kind::normal)
        throw ConfigError("cost-curve/stop-normal need 'prior.normal'");
    if (!cfg.basis_polynomial) throw ConfigError("cost-curve needs a polynomial basis");
    const TimeGrid grid = cfg.grid();
    const CostFigure fig =
        reproduce_cost_figure(cfg.H, cfg.degree, cfg.cost, *cfg.prior, grid, cfg.sigma);
    atomic_write_text(out.target("F_curve.csv"), cost_curve_csv(fig.curve));
    out.write_summary(json{{"command", refine_stop ? "stop-normal" : "cost-curve"},
                           {"tau", fig.solution.tau},
                           {"expected_cost", fig.solution.expected_cost},
                           {"unimodal", fig.unimodal},
                           {"sign_changes", fig.sign_changes}});
    std::cout << (refine_stop ? "stop-normal" : "cost-curve") << ": tau = " << fmt17(fig.solution.tau)
              << ", expected cost = " << fmt17(fig.solution.expected_cost) << "\n";
    return 0;
}

int cmd_stop_uniform(const RunConfig& cfg, const OutputContext& out) {
    if (!cfg.prior || cfg.prior->kind != Prior::Kind::uniform)
        throw ConfigError("stop-uniform needs 'prior.uniform'");
    if (!(cfg.cost > 0.0)) throw ConfigError("'cost' must be positive for stop-uniform");
    const double a = cfg.prior->lo[0], b = cfg.prior->hi[0];
    const StoppingSolution sol =
        uniform_stop_dp(a, b, cfg.model(), cfg.sigma, cfg.cost, cfg.grid(), cfg.lattice);
    atomic_write_text(out.target("policy.csv"), policy_csv(sol));
    json summary{{"command", "stop-uniform"},
                 {"expected_cost", sol.expected_cost},
                 {"bins", static_cast<int>(sol.statistic.size())},
                 {"time_slices", static_cast<int>(sol.times.size())}};
    if (!std::isnan(sol.tau)) summary["tau"] = sol.tau;
    out.write_summary(summary);
    std::cout << "stop-uniform: expected cost = " << fmt17(sol.expected_cost) << "\n";
    return 0;
}

int cmd_mc(const RunConfig& cfg, const OutputContext& out, std::uint64_t seed) {
    ExperimentSpec spec;
    spec.scenario = cfg.estimator == "bracket" ? "bracket" : "mc";
    spec.model = cfg.model();
    spec.basis = cfg.basis();
    spec.grid = cfg.grid();
    spec.estimator = cfg.estimator == "bracket" ? ExperimentSpec::Estimator::bracket
                                                : ExperimentSpec::Estimator::ml;
    if (cfg.theta) {
        Eigen::VectorXd th(static_cast<Eigen::Index>(cfg.theta->size()));
        for (std::size_t i = 0; i < cfg.theta->size(); ++i)
            th[static_cast<Eigen::Index>(i)] = (*cfg.theta)[i];
        spec.truth = th;
    } else if (cfg.prior) {
        spec.prior = cfg.prior;
    }
    spec.replications = cfg.replications;
    spec.base_seed = RngSeed{seed, cfg.stream};
    spec.method = cfg.method;
    spec.workers = cfg.workers;

    const McReport report = run_mc(spec);
    atomic_write_text(out.target("report.csv"), report_csv(report.rows));
    out.write_summary(json{{"command", "mc"},
                           {"replications", cfg.replications},
                           {"failures", static_cast<int>(report.failures.size())},
                           {"rows", static_cast<int>(report.rows.size())}});
    std::cout << "mc: wrote " << out.target("report.csv").string() << " ("
              << report.rows.size() << " rows, " << report.failures.size() << " failures)\n";
    return 0;
}

int cmd_oracle_check(const RunConfig& cfg, const OutputContext& out, std::uint64_t seed) {
    const HurstModel model = cfg.model();
    const TimeGrid grid = cfg.grid();
    json checks = json::array();
    bool all_pass = true;
    const auto add = [&](const std::string& name, double err, double tol) {
        const bool pass = err <= tol;
        all_pass = all_pass && pass;
        checks.push_back(json{{"name", name}, {"max_rel_err", err}, {"tol", tol}, {"pass", pass}});
        std::cout << (pass ? "[ok]   " : "[FAIL] ") << name << ": err " << err << " (tol " << tol
                  << ")\n";
    };

    {  // brownian constants
        const HurstModel half = make_hurst_model(0.5);
        add("kappa_lambda_at_half",
            std::max(std::abs(half.kappa - 1.0), std::abs(half.lambda - 1.0)), 1e-12);
    }

    const int deg = std::max(1, std::min(cfg.degree, 3));
    const DriftBasis basis = polynomial_basis(deg, cfg.sigma);
    {  // closed-form vs numeric psi rows
        const PsiEvaluations closed = psi_closed_poly(model, basis, grid);
        const PsiEvaluations numeric = psi_numeric(model, basis, grid);
        double err = 0.0;
        for (int i = 1; i <= deg; ++i)
            for (std::size_t j = 0; j < grid.size(); ++j) {
                if (grid[j] < 0.1 * grid.horizon()) continue;
                const double c = closed.psi[static_cast<std::size_t>(i)][j];
                err = std::max(err,
                               std::abs(numeric.psi[static_cast<std::size_t>(i)][j] - c) / std::abs(c));
            }
        add("psi_numeric_vs_closed", err, 1e-3);

        // information accrued on [0.1 T, T] (numeric psi is valid there for every H)
        const double t0 = grid[grid.size() / 10];
        const Eigen::MatrixXd dn = gram_matrix(numeric, model, grid.horizon(), GramMethod::numeric).R -
                                   gram_matrix(numeric, model, t0, GramMethod::numeric).R;
        const Eigen::MatrixXd dc =
            gram_matrix(closed, model, grid.horizon(), GramMethod::closed_form).R -
            gram_matrix(closed, model, t0, GramMethod::closed_form).R;
        add("gram_numeric_vs_closed", (dn - dc).norm() / dc.norm(), 1e-3);
    }

    {  // posterior closed forms vs the brute-force oracle on a seeded instance
        const SamplePath xi = simulate_observation({0.0, 0.8}, polynomial_basis(1, cfg.sigma), model,
                                                   grid, RngSeed{seed, cfg.stream});
        const PsiEvaluations psi = psi_closed_poly(model, polynomial_basis(1, cfg.sigma), grid);
        const MartingalePath mp = martingale_transform(xi, cfg.sigma, model);
        const GramMatrix gram = gram_matrix(psi, model, grid.horizon());
        const ScoreVector score = score_vector(psi, mp, grid.horizon());

        QuadratureSpec qs;
        qs.points_per_dim = static_cast<std::size_t>(cfg.oracle_points) * 20 + 1;
        const Prior np = make_normal_prior(Eigen::VectorXd::Constant(1, 0.4),
                                           Eigen::MatrixXd::Constant(1, 1, 1.5));
        const PosteriorSummary exact = normal_posterior(np, gram, score);
        const PosteriorSummary brute = quadrature_posterior_oracle(np, gram, score, qs);
        add("normal_posterior_vs_oracle",
            std::max(std::abs(exact.mean[0] - brute.mean[0]),
                     std::abs(exact.covariance(0, 0) - brute.covariance(0, 0))),
            1e-6);

        const UniformPosterior up = uniform_posterior_n1(-1.0, 2.0, mp, cfg.sigma, grid.horizon());
        const Prior box = make_uniform_prior(Eigen::VectorXd::Constant(1, -1.0),
                                             Eigen::VectorXd::Constant(1, 2.0));
        const PosteriorSummary ubrute = quadrature_posterior_oracle(box, gram, score, qs);
        add("uniform_posterior_vs_oracle",
            std::max(std::abs(up.estimate - ubrute.mean[0]),
                     std::abs(up.mse - ubrute.covariance(0, 0))),
            1e-6);
    }

    out.write_summary(json{{"command", "oracle-check"}, {"checks", checks}, {"all_pass", all_pass}});
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracdrift: sequential drift estimation for fractional Brownian observations"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string format = "json";
    std::optional<std::uint64_t> seed_override;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration")->required();
        cmd->add_option("--out", out_dir, "output directory (default: current)");
        cmd->add_option("--seed", seed_override, "override the config seed");
        cmd->add_option("--format", format, "summary format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    CLI::App* c_sim = app.add_subcommand("simulate", "simulate an observation path");
    CLI::App* c_tr = app.add_subcommand("transform", "fundamental martingale of a path");
    CLI::App* c_ml = app.add_subcommand("estimate-ml", "maximum-likelihood drift estimate");
    CLI::App* c_by = app.add_subcommand("estimate-bayes", "posterior mean and covariance");
    CLI::App* c_cc = app.add_subcommand("cost-curve", "normal-prior stopping cost curve");
    CLI::App* c_sn = app.add_subcommand("stop-normal", "deterministic optimal stopping time");
    CLI::App* c_su = app.add_subcommand("stop-uniform", "lattice stopping policy, uniform prior");
    CLI::App* c_mc = app.add_subcommand("mc", "Monte Carlo estimator study");
    CLI::App* c_oc = app.add_subcommand("oracle-check", "cross-check closed forms against oracles");
    for (CLI::App* cmd : {c_sim, c_tr, c_ml, c_by, c_cc, c_sn, c_su, c_mc, c_oc}) add_common(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const RunConfig cfg = load_config(config_path);
        OutputContext out;
        out.out_dir = out_dir;
        out.format = format;
        fs::create_directories(out.out_dir);

        if (app.got_subcommand(c_sim))
            return cmd_simulate(cfg, out, effective_seed(cfg, "simulate", seed_override));
        if (app.got_subcommand(c_tr)) return cmd_transform(cfg, out);
        if (app.got_subcommand(c_ml)) return cmd_estimate_ml(cfg, out);
        if (app.got_subcommand(c_by)) return cmd_estimate_bayes(cfg, out);
        if (app.got_subcommand(c_cc)) return cmd_cost_curve(cfg, out, false);
        if (app.got_subcommand(c_sn)) return cmd_cost_curve(cfg, out, true);
        if (app.got_subcommand(c_su)) return cmd_stop_uniform(cfg, out);
        if (app.got_subcommand(c_mc)) return cmd_mc(cfg, out, effective_seed(cfg, "mc", seed_override));
        if (app.got_subcommand(c_oc))
            return cmd_oracle_check(cfg, out, effective_seed(cfg, "oracle-check", seed_override));
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
