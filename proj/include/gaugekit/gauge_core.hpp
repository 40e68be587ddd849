#pragma once

// Prices, quantities and the two global gauge symmetries acting on them:
// a deterministic rescaling of all prices by e^{phi(t)} and an invertible
// redefinition of trade units b(t) in GL(N).
//
// Discrete convention used throughout: every time derivative of a log-quantity
// is the forward difference over [t_k, t_{k+1}] and is attributed to that
// interval, so rates, returns and gauge fields carry `steps` values while
// prices and gauge parameters carry `steps + 1`.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gaugekit/time_grid.hpp"

namespace gaugekit {

/// Whether a panel must hold strictly positive prices. Panels produced by a
/// trade-unit gauge quote prices of linear combinations, which may be signed.
enum class PriceDomain { positive, signed_combination };

/// Prices (and optionally held quantities) for N instruments on a time grid.
/// Rows are grid nodes, columns are instruments.
class PricePanel {
public:
    PricePanel(TimeGrid grid, Eigen::MatrixXd prices, std::vector<std::string> asset_ids,
               std::optional<Eigen::MatrixXd> quantities = std::nullopt,
               PriceDomain domain = PriceDomain::positive);

    const TimeGrid& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& prices() const noexcept { return prices_; }
    const std::optional<Eigen::MatrixXd>& quantities() const noexcept { return quantities_; }
    const std::vector<std::string>& asset_ids() const noexcept { return asset_ids_; }
    PriceDomain domain() const noexcept { return domain_; }
    std::size_t n_assets() const noexcept { return static_cast<std::size_t>(prices_.cols()); }

    /// Column holding unit-price cash, if the panel was tagged with one.
    std::optional<std::size_t> cash_column() const noexcept { return cash_column_; }
    /// ISO-8601 dates per row when the panel came from a file.
    const std::vector<std::string>& dates() const noexcept { return dates_; }

    PricePanel with_quantities(Eigen::MatrixXd quantities) const;
    PricePanel with_cash_column(std::optional<std::size_t> column) const;
    PricePanel with_dates(std::vector<std::string> dates) const;

    /// Column view of one instrument's prices as a node-layout series.
    Series price_series(std::size_t column) const;

private:
    TimeGrid grid_;
    Eigen::MatrixXd prices_;
    std::vector<std::string> asset_ids_;
    std::optional<Eigen::MatrixXd> quantities_;
    PriceDomain domain_;
    std::optional<std::size_t> cash_column_;
    std::vector<std::string> dates_;
};

/// Deterministic gauge parameter phi(t), sampled at grid nodes.
class GaugeScalar {
public:
    explicit GaugeScalar(Series phi);
    static GaugeScalar zero(const TimeGrid& grid);

    const Series& phi() const noexcept { return phi_; }
    const TimeGrid& grid() const noexcept { return phi_.grid(); }
    /// Forward-difference phi-dot per interval.
    Series rate() const;
    GaugeScalar negated() const;

private:
    Series phi_;
};

/// Background field A(t) for the price-rescaling symmetry, one rate per interval.
class GaugeFieldA {
public:
    explicit GaugeFieldA(Series a);
    static GaugeFieldA zero(const TimeGrid& grid);
    static GaugeFieldA constant(const TimeGrid& grid, double value);

    const Series& a() const noexcept { return a_; }
    const TimeGrid& grid() const noexcept { return a_.grid(); }
    double operator[](std::size_t k) const { return a_[k]; }

private:
    Series a_;
};

/// Time-dependent change of trade units b(t), one invertible matrix per node.
class TradeUnitMap {
public:
    /// Rejects any matrix whose 2-norm condition number exceeds this.
    static constexpr double max_condition = 1e12;

    TradeUnitMap(TimeGrid grid, std::vector<Eigen::MatrixXd> b);
    static TradeUnitMap identity(const TimeGrid& grid, std::size_t n);

    const TimeGrid& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& at(std::size_t k) const { return b_.at(k); }
    const Eigen::MatrixXd& inverse(std::size_t k) const { return b_inv_.at(k); }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(b_.front().rows()); }

    /// Pointwise product (this * other)(t) = this(t) other(t).
    TradeUnitMap compose(const TradeUnitMap& other) const;

private:
    TimeGrid grid_;
    std::vector<Eigen::MatrixXd> b_;
    std::vector<Eigen::MatrixXd> b_inv_;
};

/// Background field for the trade-unit symmetry, one N x N rate matrix per
/// interval. Stored densely, or as its diagonal when the field is diagonal
/// (the market-gauge B_N is, and dense storage would be N^2 per step).
class GaugeFieldB {
public:
    /// Dense field. When `option_block` is set the first `*option_block`
    /// indices form the option block and the field must be block-diagonal.
    GaugeFieldB(TimeGrid grid, std::vector<Eigen::MatrixXd> fields,
                std::optional<std::size_t> option_block = std::nullopt);
    /// Diagonal field with `diagonal` of shape [steps x N].
    static GaugeFieldB diagonal(TimeGrid grid, Eigen::MatrixXd diagonal);
    static GaugeFieldB zero(const TimeGrid& grid, std::size_t n);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t dimension() const noexcept { return n_; }
    bool is_diagonal() const noexcept { return diagonal_.has_value(); }
    std::optional<std::size_t> option_block() const noexcept { return option_block_; }

    /// Dense matrix for interval k.
    Eigen::MatrixXd matrix(std::size_t k) const;
    /// B(k) * v without materialising the matrix when diagonal.
    Eigen::VectorXd apply(std::size_t k, const Eigen::VectorXd& v) const;
    /// Largest absolute entry over all intervals.
    double max_abs() const;

private:
    GaugeFieldB(TimeGrid grid, std::size_t n) : grid_(grid), n_(n) {}

    TimeGrid grid_;
    std::size_t n_ = 0;
    std::vector<Eigen::MatrixXd> dense_;
    std::optional<Eigen::MatrixXd> diagonal_;
    std::optional<std::size_t> option_block_;
};

enum class ReturnKind { nominal, real };

/// Log-return rates per interval (1/years).
struct ReturnSeries {
    Series values;
    ReturnKind kind = ReturnKind::nominal;
};

/// Sum over instruments of price times quantity at grid node k.
double portfolio_value(const PricePanel& panel, std::size_t k);

/// Multiplies every price by e^{phi(t)}; quantities are untouched.
PricePanel apply_price_gauge(const PricePanel& panel, const GaugeScalar& phi);

/// q' = b q and s' = (b^{-1})^T s at every node. Portfolio values are unchanged.
PricePanel apply_trade_unit_gauge(const PricePanel& panel, const TradeUnitMap& b);

/// A' = A - phi-dot.
GaugeFieldA transform_gauge_a(const GaugeFieldA& a, const GaugeScalar& phi);

/// B' = b B b^{-1} - b-dot b^{-1}, realised on each interval through the
/// transport matrix U_k = exp(-B_k dt): U'_k = b_{k+1} U_k b_k^{-1} and
/// B'_k = -log(U'_k) / dt. This is the log forward difference applied to
/// matrices, and composes exactly as a group action.
GaugeFieldB transform_gauge_b(const GaugeFieldB& field, const TradeUnitMap& b);

/// Forward log-return rates (ln v_{k+1} - ln v_k) / dt of a positive series.
ReturnSeries nominal_return(const Series& values);

/// Nominal return plus A on each interval; zero for the risk-free portfolio.
ReturnSeries real_return(const Series& values, const GaugeFieldA& a);

/// 2-norm condition number via SVD; infinity for singular matrices.
double condition_number(const Eigen::MatrixXd& m);

}  // namespace gaugekit
