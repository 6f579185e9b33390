#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "qmr/time_grid.hpp"

namespace qmr {

/// A bundle of Monte Carlo sample paths of one process, stored row-major:
/// one contiguous row of grid.steps()+1 node values per path. Deterministic
/// quantities are the single-path special case.
class PathSet {
public:
    PathSet(const TimeGrid& grid, int paths, double fill = 0.0)
        : grid_(grid), paths_(paths), nodes_(grid.steps() + 1) {
        if (paths < 1) throw std::invalid_argument("PathSet: path count must be positive");
        data_.assign(static_cast<std::size_t>(paths_) * nodes_, fill);
    }

    const TimeGrid& grid() const { return grid_; }
    int paths() const { return paths_; }
    int nodes() const { return nodes_; }

    double* row(int m) { return data_.data() + static_cast<std::size_t>(m) * nodes_; }
    const double* row(int m) const { return data_.data() + static_cast<std::size_t>(m) * nodes_; }
    double& at(int m, int i) { return data_[static_cast<std::size_t>(m) * nodes_ + i]; }
    double at(int m, int i) const { return data_[static_cast<std::size_t>(m) * nodes_ + i]; }

    /// Values of node i across all paths.
    void gather_node(int i, std::span<double> out) const {
        for (int m = 0; m < paths_; ++m) out[static_cast<std::size_t>(m)] = at(m, i);
    }

    void fill(double v) { data_.assign(data_.size(), v); }

private:
    TimeGrid grid_;
    int paths_;
    int nodes_;
    std::vector<double> data_;
};

}  // namespace qmr
