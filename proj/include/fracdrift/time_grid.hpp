#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracdrift {

/// Strictly increasing grid 0 = t_0 < t_1 < ... < t_N on which sample
/// paths and transforms are discretized.
class TimeGrid {
  public:
    TimeGrid() = default;

    /// The degenerate grid {0} is accepted; operations that need steps
    /// (derivatives, transforms) check their own minimum size.
    explicit TimeGrid(std::vector<double> points) : points_(std::move(points)) {
        if (points_.empty())
            throw std::invalid_argument("TimeGrid: need at least one point");
        if (points_.front() != 0.0)
            throw std::invalid_argument("TimeGrid: first point must be exactly 0");
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (!(points_[i] > points_[i - 1]))
                throw std::invalid_argument("TimeGrid: points must be strictly increasing (index " +
                                            std::to_string(i) + ")");
    }

    /// Uniform grid with n steps over [0, horizon].
    static TimeGrid uniform(double horizon, std::size_t n_steps) {
        if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid::uniform: horizon must be positive");
        if (n_steps < 1) throw std::invalid_argument("TimeGrid::uniform: need at least one step");
        std::vector<double> pts(n_steps + 1);
        for (std::size_t i = 0; i <= n_steps; ++i)
            pts[i] = horizon * static_cast<double>(i) / static_cast<double>(n_steps);
        pts[0] = 0.0;
        return TimeGrid(std::move(pts));
    }

    const std::vector<double>& points() const { return points_; }
    double operator[](std::size_t i) const { return points_[i]; }
    std::size_t size() const { return points_.size(); }
    std::size_t steps() const { return points_.size() - 1; }
    double horizon() const { return points_.back(); }

    bool is_uniform(double rtol = 1e-12) const {
        const double dt = points_[1] - points_[0];
        for (std::size_t i = 1; i + 1 < points_.size(); ++i) {
            const double d = points_[i + 1] - points_[i];
            if (std::abs(d - dt) > rtol * std::max(d, dt)) return false;
        }
        return true;
    }

    /// Index of a grid point equal to t (within rtol of the local spacing);
    /// throws if t is not a grid point.
    std::size_t index_of(double t) const {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const double scale = (i + 1 < points_.size() ? points_[i + 1] - points_[i]
                                                         : points_[i] - points_[i - 1]);
            if (std::abs(points_[i] - t) <= 1e-9 * std::max(scale, 1.0) + 1e-12) return i;
        }
        throw std::invalid_argument("TimeGrid: t = " + std::to_string(t) + " is not a grid point");
    }

    bool same_as(const TimeGrid& other) const { return points_ == other.points_; }

  private:
    std::vector<double> points_;
};

}  // namespace fracdrift
