#pragma once

// File formats. Bulk numeric data is CSV with 17-significant-digit decimal
// floats (lossless double round trip); scalar summaries are JSON. Writers
// are atomic: content goes to a temporary file in the target directory and
// is renamed into place, so partial outputs are never left behind.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracdrift/bayes.hpp"
#include "fracdrift/drift_basis.hpp"
#include "fracdrift/estimator.hpp"
#include "fracdrift/sample_path.hpp"
#include "fracdrift/transform.hpp"

namespace fracdrift {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        os << content;
        if (!os.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

// --- CSV writers -----------------------------------------------------------

inline std::string sample_path_csv(const SamplePath& path) {
    std::ostringstream os;
    os << "t,value\n";
    for (std::size_t i = 0; i < path.size(); ++i)
        os << fmt17(path.grid[i]) << ',' << fmt17(path.values[i]) << '\n';
    return os.str();
}

inline std::string martingale_csv(const MartingalePath& mp) {
    std::ostringstream os;
    os << "t,M,w,m\n";
    for (std::size_t i = 0; i < mp.grid.size(); ++i)
        os << fmt17(mp.grid[i]) << ',' << fmt17(mp.M[i]) << ',' << fmt17(mp.w[i]) << ','
           << fmt17(mp.m[i]) << '\n';
    return os.str();
}

inline std::string trajectory_csv(const std::vector<TrajectoryPoint>& traj, int dimension) {
    std::ostringstream os;
    os << "t";
    for (int i = 0; i < dimension; ++i) os << ",theta_" << i;
    os << ",cond\n";
    for (const auto& p : traj) {
        os << fmt17(p.t);
        for (int i = 0; i < dimension; ++i) os << ',' << fmt17(p.theta_hat[i]);
        os << ',' << fmt17(p.condition) << '\n';
    }
    return os.str();
}

inline std::string cost_curve_csv(const CostCurve& curve) {
    std::ostringstream os;
    os << "t,F\n";
    for (std::size_t i = 0; i < curve.t.size(); ++i)
        os << fmt17(curve.t[i]) << ',' << fmt17(curve.F[i]) << '\n';
    return os.str();
}

inline std::string policy_csv(const StoppingSolution& sol) {
    std::ostringstream os;
    os << "t,M,action\n";
    const std::size_t nb = sol.statistic.size();
    for (std::size_t k = 0; k < sol.times.size(); ++k)
        for (std::size_t i = 0; i < nb; ++i)
            os << fmt17(sol.times[k]) << ',' << fmt17(sol.statistic[i]) << ','
               << (sol.stop[k * nb + i] ? "stop" : "continue") << '\n';
    return os.str();
}

inline std::string posterior_summary_json(const PosteriorSummary& ps) {
    std::ostringstream os;
    os << "{\n  \"t\": " << fmt17(ps.t) << ",\n  \"mean\": [";
    for (Eigen::Index i = 0; i < ps.mean.size(); ++i)
        os << (i ? ", " : "") << fmt17(ps.mean[i]);
    os << "],\n  \"cov\": [";
    for (Eigen::Index i = 0; i < ps.covariance.rows(); ++i) {
        os << (i ? ", [" : "[");
        for (Eigen::Index j = 0; j < ps.covariance.cols(); ++j)
            os << (j ? ", " : "") << fmt17(ps.covariance(i, j));
        os << "]";
    }
    os << "],\n  \"mse_trace\": " << fmt17(ps.mse_trace) << "\n}\n";
    return os.str();
}

// --- CSV readers -----------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

inline SamplePath read_sample_path_csv(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("cannot open " + file.string());
    std::string line;
    if (!std::getline(is, line) || detail::split_csv_line(line).size() != 2)
        throw std::runtime_error(file.string() + ": expected header 't,value'");
    std::vector<double> t, v;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 2) throw std::runtime_error(file.string() + ": malformed row");
        t.push_back(std::stod(cells[0]));
        v.push_back(std::stod(cells[1]));
    }
    return SamplePath(TimeGrid(std::move(t)), std::move(v));
}

/// Tabulated basis input: header `t,dphi_0,...,dphi_n`.
inline DriftBasis read_tabulated_basis_csv(const std::filesystem::path& file, double sigma) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("cannot open " + file.string());
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(file.string() + ": empty file");
    const std::size_t cols = detail::split_csv_line(line).size();
    if (cols < 2) throw std::runtime_error(file.string() + ": expected header 't,dphi_0,...'");
    std::vector<double> t;
    std::vector<std::vector<double>> rows(cols - 1);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != cols) throw std::runtime_error(file.string() + ": malformed row");
        t.push_back(std::stod(cells[0]));
        for (std::size_t i = 1; i < cols; ++i) rows[i - 1].push_back(std::stod(cells[i]));
    }
    return tabulated_basis(TimeGrid(std::move(t)), std::move(rows), sigma);
}

}  // namespace fracdrift
