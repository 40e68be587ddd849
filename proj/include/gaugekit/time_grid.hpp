#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gaugekit {

/// Uniform time grid: nodes t0 + k*dt for k = 0..steps (years).
class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(double t0, double dt, std::size_t steps);

    /// Grid starting at 0 covering [0, horizon] with `steps` intervals.
    static TimeGrid over(double horizon, std::size_t steps);

    double t0() const noexcept { return t0_; }
    double dt() const noexcept { return dt_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t nodes() const noexcept { return steps_ + 1; }

    double at(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }
    double end() const noexcept { return at(steps_); }

    /// Index of the node at time t. Throws unless t is a grid node (to 1e-9 dt).
    std::size_t node_index(double t) const;

    bool operator==(const TimeGrid&) const = default;

private:
    double t0_ = 0.0;
    double dt_ = 1.0;
    std::size_t steps_ = 1;
};

enum class Layout {
    nodes,      ///< one value per grid node (steps + 1 values)
    intervals,  ///< one value per interval [t_k, t_{k+1}] (steps values)
};

/// Scalar time series on a TimeGrid. The layout is implied by the length.
class Series {
public:
    Series() = default;
    Series(TimeGrid grid, std::vector<double> values);

    static Series constant(const TimeGrid& grid, Layout layout, double value);

    const TimeGrid& grid() const noexcept { return grid_; }
    Layout layout() const noexcept { return layout_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Value attributed to interval k: the stored value for interval layout,
    /// the mean of the bracketing nodes for node layout.
    double interval_value(std::size_t k) const;

    /// Integral over [from, to]; both ends must be grid nodes. Trapezoid rule
    /// for node layout, exact piecewise-constant sum for interval layout.
    double integrate(double from, double to) const;

private:
    TimeGrid grid_;
    std::vector<double> values_;
    Layout layout_ = Layout::nodes;
};

}  // namespace gaugekit
