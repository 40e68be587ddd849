#pragma once

// Discount factors: the textbook e^{-int r} (not gauge invariant) against the
// gauge-invariant exp(int (mu - sigma^2/2 + A)) of a cash-like asset, and the
// pipeline that values a panel of instruments in units of the risk-free
// portfolio built from it.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaugekit/gauge_core.hpp"
#include "gaugekit/riskfree.hpp"

namespace gaugekit {

/// e^{-int_{t0}^{T} r dt}; T must be a node of the series' grid.
double textbook_discount(const Series& r, double horizon);

/// n0 / n_T = exp(int (mu - sigma^2/2) dt + int A dt) over [t0, T].
double gauge_discount(const Series& mu, const Series& sigma, const GaugeFieldA& a, double horizon);

/// n_T = n0 s(0) / s(T): the same value re-expressed at the exchange rate of time T.
double forward_translate(double n0, const Series& s, double horizon);

enum class DiscountMode { textbook, gauge_invariant };

struct DiscountSpec {
    DiscountMode mode = DiscountMode::textbook;
    double horizon = 0.0;
    std::optional<Series> r;
    std::optional<Series> mu;
    std::optional<Series> sigma;
    std::optional<GaugeFieldA> a;
    std::string label;
};

/// Dispatches on `mode`; throws ValidationError when the series it needs are missing.
double discount(const DiscountSpec& spec);

struct PipelineOptions {
    RebalancePolicy rebalance{};   ///< daily (every grid step) unless overridden
    std::size_t window = 63;       ///< rolling window for mu, sigma estimates (grid steps)
};

struct DiscountReport {
    std::vector<std::string> labels;     ///< panel columns, then "Risk-free portfolio"
    std::vector<double> final_values;    ///< value at T in risk-free units (inception value 1)
    std::vector<double> discount_factors;  ///< gauge-invariant n0 / n_T per column
    double cash_discount = 0.0;          ///< n0 for n_T = 1 unit of cash
    std::string cash_label;
    Eigen::VectorXd weights;             ///< over the non-cash columns
    std::size_t rebalance_every = 1;
    std::size_t window = 63;
    bool riskfree_gauge = true;          ///< values are quoted in the A' = 0 gauge
    TimeGrid grid;
    Series a;                            ///< extracted market gauge A per interval
};

/// Builds the risk-free portfolio from the non-cash columns (equal weights by
/// default), extracts A, converts everything to risk-free units and reports
/// final values and discount factors. Requires a cash column and every price
/// normalised to 1 at inception.
DiscountReport empirical_pipeline(const PricePanel& panel, const std::optional<WeightVector>& weights = std::nullopt,
                                  const PipelineOptions& options = {});

struct LabeledSeries {
    std::string label;
    Series values;
};

/// The cash column in risk-free units; starts at exactly 1.
LabeledSeries fig1_series(const PricePanel& panel, const std::optional<WeightVector>& weights = std::nullopt,
                          const PipelineOptions& options = {});

/// Trailing-window estimates per interval of mu and sigma from log returns,
/// using the intervals [k - window + 1, k] (fewer at the start).
std::pair<Series, Series> rolling_drift_vol(const Series& prices, std::size_t window);

/// Aligned plain-text "Final Asset Values" table.
std::string format_final_values(const DiscountReport& report);

}  // namespace gaugekit
