#pragma once

#include <stdexcept>
#include <vector>

#include "fracdrift/time_grid.hpp"

namespace fracdrift {

/// A process sampled on a time grid (observation, FBM, transformed paths).
struct SamplePath {
    TimeGrid grid;
    std::vector<double> values;

    SamplePath() = default;
    SamplePath(TimeGrid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (grid.size() != values.size())
            throw std::invalid_argument("SamplePath: grid/value length mismatch");
    }

    std::size_t size() const { return values.size(); }
};

}  // namespace fracdrift
