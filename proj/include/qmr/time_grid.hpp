#pragma once

#include <stdexcept>
#include <vector>

namespace qmr {

/// Uniform time grid t_i = i*T/N on [0, T].
class TimeGrid {
public:
    TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
        if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
        if (steps < 1) throw std::invalid_argument("TimeGrid: step count must be positive");
        delta_ = horizon / steps;
        nodes_.resize(static_cast<std::size_t>(steps) + 1);
        for (int i = 0; i <= steps; ++i) nodes_[static_cast<std::size_t>(i)] = i * delta_;
        nodes_.back() = horizon;
    }

    double horizon() const { return horizon_; }
    int steps() const { return steps_; }
    double delta() const { return delta_; }
    double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& nodes() const { return nodes_; }

private:
    double horizon_;
    int steps_;
    double delta_;
    std::vector<double> nodes_;
};

}  // namespace qmr
