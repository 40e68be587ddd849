#include "gaugekit/time_grid.hpp"

#include <cmath>
#include <string>

#include "gaugekit/error.hpp"

namespace gaugekit {

TimeGrid::TimeGrid(double t0, double dt, std::size_t steps) : t0_(t0), dt_(dt), steps_(steps) {
    if (!std::isfinite(t0) || !std::isfinite(dt) || dt <= 0.0) {
        throw ValidationError("time grid: dt must be finite and positive");
    }
    if (steps < 1) {
        throw ValidationError("time grid: need at least one step");
    }
}

TimeGrid TimeGrid::over(double horizon, std::size_t steps) {
    if (!(horizon > 0.0) || steps < 1) {
        throw ValidationError("time grid: horizon must be positive with at least one step");
    }
    return TimeGrid(0.0, horizon / static_cast<double>(steps), steps);
}

std::size_t TimeGrid::node_index(double t) const {
    const double pos = (t - t0_) / dt_;
    const double k = std::round(pos);
    if (k < 0.0 || k > static_cast<double>(steps_) || std::abs(pos - k) > 1e-9) {
        throw ValidationError("time " + std::to_string(t) + " is not covered by the grid [" +
                              std::to_string(t0_) + ", " + std::to_string(end()) + "]");
    }
    return static_cast<std::size_t>(k);
}

Series::Series(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() == grid_.nodes()) {
        layout_ = Layout::nodes;
    } else if (values_.size() == grid_.steps()) {
        layout_ = Layout::intervals;
    } else {
        throw ValidationError("series length " + std::to_string(values_.size()) +
                              " matches neither the nodes nor the intervals of its grid");
    }
}

Series Series::constant(const TimeGrid& grid, Layout layout, double value) {
    const std::size_t n = layout == Layout::nodes ? grid.nodes() : grid.steps();
    return Series(grid, std::vector<double>(n, value));
}

double Series::interval_value(std::size_t k) const {
    if (layout_ == Layout::intervals) return values_.at(k);
    return 0.5 * (values_.at(k) + values_.at(k + 1));
}

double Series::integrate(double from, double to) const {
    const std::size_t a = grid_.node_index(from);
    const std::size_t b = grid_.node_index(to);
    if (b < a) throw ValidationError("integration bounds reversed");
    double sum = 0.0;
    if (layout_ == Layout::intervals) {
        for (std::size_t k = a; k < b; ++k) sum += values_[k];
    } else {
        for (std::size_t k = a; k < b; ++k) sum += 0.5 * (values_[k] + values_[k + 1]);
    }
    return sum * grid_.dt();
}

}  // namespace gaugekit
