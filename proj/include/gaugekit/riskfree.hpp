#pragma once

// Asymptotically risk-free portfolios: price-insensitivity checks, market
// gauge extraction, the A' = 0 gauge, diversification studies and weights
// that are insensitive to forecasting errors in the environment factors.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaugekit/gauge_core.hpp"
#include "gaugekit/stochastic_sim.hpp"

namespace gaugekit {

enum class WeightScheme { equal, custom };

/// Portfolio weights summing to one.
class WeightVector {
public:
    /// Requires |sum(w) - 1| <= 1e-12.
    explicit WeightVector(Eigen::VectorXd w, WeightScheme scheme = WeightScheme::custom);

    static WeightVector equal(std::size_t n);
    /// Divides by the sum; the sum must be positive.
    static WeightVector normalized(Eigen::VectorXd raw);
    /// Raw weights drawn uniformly from [low, high] (counter-based, keyed by seed), then normalised.
    static WeightVector random_positive(std::size_t n, std::uint64_t seed, double low = 0.5, double high = 1.5);

    const Eigen::VectorXd& w() const noexcept { return w_; }
    WeightScheme scheme() const noexcept { return scheme_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(w_.size()); }

    /// Strictly positive (long only, no leverage) with max weight <= cap / N.
    bool is_riskfree_candidate(double cap) const;
    /// Throws ValidationError naming the offending entry unless is_riskfree_candidate.
    void require_riskfree_candidate(double cap) const;

    /// First n weights renormalised to sum to one.
    WeightVector prefix(std::size_t n) const;

private:
    Eigen::VectorXd w_;
    WeightScheme scheme_;
};

struct InsensitivityReport {
    Eigen::VectorXd residual;  ///< sum_alpha K^alpha dP_alpha/ds_i, one per asset
    double max_abs = 0.0;
    double tolerance = 0.0;    ///< 1e-8 * ||K|| * ||dP/ds|| unless overridden
    bool insensitive = false;
};

/// Price-insensitivity residual at node k. `deltas` is [instruments x assets].
InsensitivityReport insensitivity_residual(const PricePanel& panel, const Eigen::MatrixXd& deltas, std::size_t k,
                                           std::optional<double> tolerance = std::nullopt);

/// Asset quantity that delta-hedges `option_qty` options: q = -Q dV/ds.
double delta_hedge(double option_delta, double option_qty);

/// How often holdings are reset to target weights: 0 = buy and hold,
/// m = every m grid steps (1 = every step).
struct RebalancePolicy {
    std::size_t every = 1;
};

struct MarketGaugeResult {
    GaugeFieldA a;                   ///< -d/dt ln(s.q) per interval
    GaugeFieldB b_n;                 ///< diagonal, (B_N)_ii = d/dt ln q^i
    Series portfolio_value;          ///< s.q at every node, 1 at inception for weight-built portfolios
    Eigen::MatrixXd quantities;      ///< q per node, [nodes x assets]
};

/// Builds q^i = w^i / s_i at inception, evolves it self-financingly under the
/// rebalancing policy and extracts the market gauge fields.
MarketGaugeResult extract_market_gauge(const PricePanel& panel, const WeightVector& w,
                                       RebalancePolicy policy = {});

/// Market gauge of the holdings the panel already carries (positive quantities).
MarketGaugeResult extract_market_gauge(const PricePanel& panel);

struct BalanceResiduals {
    double price_balance = 0.0;  ///< max |s-dot.q + A s.q + s.B_N.q| / s.q
    double flow_balance = 0.0;   ///< max |s.q-dot - s.B_N.q| / s.q
};

/// Discrete self-financing/constancy balances of a market-gauge result. The
/// component derivatives use the log forward difference: s-dot_i = s_i d ln s_i,
/// q-dot^i = q^i d ln q^i.
BalanceResiduals balance_residuals(const PricePanel& panel, const MarketGaugeResult& gauge);

/// Divides every price by the risk-free portfolio value (the A' = 0 gauge).
PricePanel to_riskfree_units(const PricePanel& panel, const Series& riskfree_values);

struct ScalingReport {
    std::vector<std::size_t> sizes;
    std::vector<double> sigma_hat_realized;
    std::vector<double> sigma_hat_analytic;  ///< from sigma_i evaluated at xi(t0)
    double slope = 0.0;                      ///< fitted d ln sigma-hat / d ln N
    double intercept = 0.0;
    double analytic_slope = 0.0;
};

struct StudyOptions {
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    std::size_t threads = 0;  ///< 0 = default count
};

/// Realized volatility of equal-weight portfolios on nested prefixes of the
/// asset universe, with a log-log fit against N. Needs at least 4 increasing sizes.
ScalingReport convergence_study(const ProcessSpec& spec, const EnvironmentSeries& env, const TimeGrid& grid,
                                const std::vector<std::size_t>& sizes, const StudyOptions& options);

/// Least-squares fit of ln y on ln x over finite positive pairs; returns
/// {slope, intercept}. Throws ComputationError with fewer than 3 usable points.
std::pair<double, double> fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

struct DivergenceReport {
    std::vector<std::size_t> sizes;
    std::vector<double> divergence;  ///< RMS over paths of |ln Pi_a(T) - ln Pi_b(T)|
    double terminal = 0.0;           ///< divergence at the full universe
};

/// Cumulative-return gap between two positive weightings on nested prefixes
/// of sizes min_size, 2 min_size, ... up to N (always including N).
DivergenceReport etemadi_check(const ProcessSpec& spec, const EnvironmentSeries& env, const TimeGrid& grid,
                               const WeightVector& weight_a, const WeightVector& weight_b, double cap,
                               const StudyOptions& options, std::size_t min_size = 64);

/// Minimise || w^T dmu/dxi || over the capped simplex
/// { sum w = 1, floor/N <= w_i <= cap/N }.
struct SensitivityProblem {
    Eigen::MatrixXd dmu_dxi;                ///< [N x n_factors]
    std::optional<Eigen::VectorXd> base;    ///< starting weights, equal when absent
    double cap = 2.0;                       ///< per-weight cap constant c (max w = c / N)
    double floor = 0.01;                    ///< positivity floor constant (min w = floor / N)
    double tolerance = 1e-8;                ///< residual at or below which neutrality is declared
    std::size_t max_iterations = 200000;
};

struct SensitivityResult {
    WeightVector weights;
    double residual = 0.0;
    double equal_weight_residual = 0.0;
    bool neutral = false;
    std::size_t iterations = 0;
};

SensitivityResult sensitivity_neutral_weights(const SensitivityProblem& problem);

/// Euclidean projection onto { sum w = 1, lo <= w_i <= hi }.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, double lo, double hi);

}  // namespace gaugekit
