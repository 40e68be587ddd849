#include "gaugekit/discounting.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "gaugekit/error.hpp"

namespace gaugekit {

double textbook_discount(const Series& r, double horizon) {
    if (!(horizon > 0.0)) throw ValidationError("textbook discount: horizon must be positive");
    return std::exp(-r.integrate(r.grid().t0(), r.grid().t0() + horizon));
}

double gauge_discount(const Series& mu, const Series& sigma, const GaugeFieldA& a, double horizon) {
    if (!(horizon > 0.0)) throw ValidationError("gauge discount: horizon must be positive");
    if (!(mu.grid() == sigma.grid()) || !(mu.grid() == a.grid())) {
        throw ValidationError("gauge discount: mu, sigma and A must share a time grid");
    }
    const double t0 = mu.grid().t0();
    std::vector<double> half_var(sigma.values().begin(), sigma.values().end());
    for (double& v : half_var) v = 0.5 * v * v;
    const double exponent = mu.integrate(t0, t0 + horizon) - Series(sigma.grid(), std::move(half_var)).integrate(t0, t0 + horizon) +
                            a.a().integrate(t0, t0 + horizon);
    return std::exp(exponent);
}

double forward_translate(double n0, const Series& s, double horizon) {
    if (s.layout() != Layout::nodes) throw ValidationError("forward translate: prices must be sampled at nodes");
    const std::size_t end = s.grid().node_index(s.grid().t0() + horizon);
    if (!(s[0] > 0.0) || !(s[end] > 0.0)) throw ValidationError("forward translate: prices must be positive");
    return n0 * s[0] / s[end];
}

double discount(const DiscountSpec& spec) {
    switch (spec.mode) {
        case DiscountMode::textbook:
            if (!spec.r) throw ValidationError("discount: textbook mode needs a rate series");
            return textbook_discount(*spec.r, spec.horizon);
        case DiscountMode::gauge_invariant:
            if (!spec.mu || !spec.sigma || !spec.a) {
                throw ValidationError("discount: gauge-invariant mode needs mu, sigma and A");
            }
            return gauge_discount(*spec.mu, *spec.sigma, *spec.a, spec.horizon);
    }
    throw ValidationError("discount: unknown mode");
}

std::pair<Series, Series> rolling_drift_vol(const Series& prices, std::size_t window) {
    if (window < 1) throw ValidationError("rolling estimate: window must be at least 1");
    if (prices.layout() != Layout::nodes) throw ValidationError("rolling estimate: prices must be sampled at nodes");
    const double dt = prices.grid().dt();
    const std::size_t steps = prices.grid().steps();
    std::vector<double> rates(steps);
    for (std::size_t k = 0; k < steps; ++k) rates[k] = std::log(prices[k + 1] / prices[k]) / dt;
    std::vector<double> mu(steps), sigma(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t first = k + 1 >= window ? k + 1 - window : 0;
        const auto count = static_cast<double>(k + 1 - first);
        double mean = 0.0;
        for (std::size_t j = first; j <= k; ++j) mean += rates[j];
        mean /= count;
        double var = 0.0;
        for (std::size_t j = first; j <= k; ++j) var += (rates[j] - mean) * (rates[j] - mean);
        var /= count;
        // Rates carry variance sigma^2 / dt; the log drift is mu - sigma^2/2.
        const double sig2 = var * dt;
        sigma[k] = std::sqrt(sig2);
        mu[k] = mean + 0.5 * sig2;
    }
    return {Series(prices.grid(), std::move(mu)), Series(prices.grid(), std::move(sigma))};
}

namespace {

struct RiskfreeBuild {
    std::size_t cash;
    std::vector<std::size_t> members;
    WeightVector weights;
    MarketGaugeResult gauge;
    PricePanel riskfree_units;
};

RiskfreeBuild build_riskfree(const PricePanel& panel, const std::optional<WeightVector>& weights,
                             const PipelineOptions& options) {
    const auto cash = panel.cash_column();
    if (!cash) throw ValidationError("pipeline: no cash column (tag one column label with #cash)");
    if (panel.domain() != PriceDomain::positive) throw ValidationError("pipeline: prices must be positive");
    for (std::size_t i = 0; i < panel.n_assets(); ++i) {
        const double p0 = panel.prices()(0, static_cast<Eigen::Index>(i));
        if (std::abs(p0 - 1.0) > 1e-12) {
            throw ValidationError("pipeline: prices must be normalised to 1 at inception (ingest with normalisation "
                                  "enabled, or divide each column by its first price)",
                                  std::size_t{1}, i + 1);
        }
    }
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < panel.n_assets(); ++i) {
        if (i != *cash) members.push_back(i);
    }
    if (members.empty()) throw ValidationError("pipeline: need at least one non-cash instrument");
    WeightVector w = weights ? *weights : WeightVector::equal(members.size());
    if (w.size() != members.size()) {
        throw ValidationError("pipeline: " + std::to_string(w.size()) + " weights for " +
                              std::to_string(members.size()) + " non-cash instruments");
    }
    Eigen::MatrixXd sub(panel.prices().rows(), static_cast<Eigen::Index>(members.size()));
    std::vector<std::string> ids;
    for (std::size_t j = 0; j < members.size(); ++j) {
        sub.col(static_cast<Eigen::Index>(j)) = panel.prices().col(static_cast<Eigen::Index>(members[j]));
        ids.push_back(panel.asset_ids()[members[j]]);
    }
    MarketGaugeResult gauge = extract_market_gauge(PricePanel(panel.grid(), std::move(sub), std::move(ids)), w,
                                                   options.rebalance);
    PricePanel rf = to_riskfree_units(panel, gauge.portfolio_value);
    return {*cash, std::move(members), std::move(w), std::move(gauge), std::move(rf)};
}

}  // namespace

DiscountReport empirical_pipeline(const PricePanel& panel, const std::optional<WeightVector>& weights,
                                  const PipelineOptions& options) {
    const RiskfreeBuild build = build_riskfree(panel, weights, options);
    const auto& grid = panel.grid();
    const double horizon = grid.end() - grid.t0();
    const auto last = static_cast<Eigen::Index>(grid.steps());

    DiscountReport report;
    report.grid = grid;
    report.weights = build.weights.w();
    report.rebalance_every = options.rebalance.every;
    report.window = options.window;
    report.a = build.gauge.a.a();
    report.cash_label = panel.asset_ids()[build.cash];
    for (std::size_t i = 0; i < panel.n_assets(); ++i) {
        report.labels.push_back(panel.asset_ids()[i]);
        report.final_values.push_back(build.riskfree_units.prices()(last, static_cast<Eigen::Index>(i)));
        const auto [mu, sigma] = rolling_drift_vol(panel.price_series(i), options.window);
        report.discount_factors.push_back(gauge_discount(mu, sigma, build.gauge.a, horizon));
    }
    report.cash_discount = report.discount_factors[build.cash];
    // The portfolio divided by itself: exactly 1 in its own units, and its log
    // drift cancels A interval by interval.
    report.labels.emplace_back("Risk-free portfolio");
    report.final_values.push_back(build.gauge.portfolio_value[grid.steps()] / build.gauge.portfolio_value[grid.steps()]);
    report.discount_factors.push_back(1.0);
    return report;
}

LabeledSeries fig1_series(const PricePanel& panel, const std::optional<WeightVector>& weights,
                          const PipelineOptions& options) {
    const RiskfreeBuild build = build_riskfree(panel, weights, options);
    return {panel.asset_ids()[build.cash], build.riskfree_units.price_series(build.cash)};
}

std::string format_final_values(const DiscountReport& report) {
    std::size_t width = 5;
    for (const auto& label : report.labels) width = std::max(width, label.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "Asset" << "  " << std::right << std::setw(11)
        << "Final value" << "  " << std::setw(15) << "Discount factor" << '\n';
    out << std::string(width + 30, '-') << '\n';
    out << std::fixed << std::setprecision(3);
    for (std::size_t i = 0; i < report.labels.size(); ++i) {
        out << std::left << std::setw(static_cast<int>(width)) << report.labels[i] << "  " << std::right
            << std::setw(11) << report.final_values[i] << "  " << std::setw(15) << report.discount_factors[i] << '\n';
    }
    return out.str();
}

}  // namespace gaugekit
