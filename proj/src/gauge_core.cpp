#include "gaugekit/gauge_core.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "gaugekit/error.hpp"

namespace gaugekit {

namespace {

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
    if (!(a == b)) throw ValidationError(std::string(what) + ": time grids do not match");
}

}  // namespace

double condition_number(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 1.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

// ---------------------------------------------------------------------------
// PricePanel

PricePanel::PricePanel(TimeGrid grid, Eigen::MatrixXd prices, std::vector<std::string> asset_ids,
                       std::optional<Eigen::MatrixXd> quantities, PriceDomain domain)
    : grid_(grid),
      prices_(std::move(prices)),
      asset_ids_(std::move(asset_ids)),
      quantities_(std::move(quantities)),
      domain_(domain) {
    if (static_cast<std::size_t>(prices_.rows()) != grid_.nodes()) {
        throw ValidationError("price panel: expected " + std::to_string(grid_.nodes()) +
                              " rows, got " + std::to_string(prices_.rows()));
    }
    if (prices_.cols() < 1) throw ValidationError("price panel: no instruments");
    if (asset_ids_.size() != static_cast<std::size_t>(prices_.cols())) {
        throw ValidationError("price panel: " + std::to_string(asset_ids_.size()) +
                              " labels for " + std::to_string(prices_.cols()) + " columns");
    }
    for (Eigen::Index k = 0; k < prices_.rows(); ++k) {
        for (Eigen::Index i = 0; i < prices_.cols(); ++i) {
            const double p = prices_(k, i);
            if (!std::isfinite(p) || (domain_ == PriceDomain::positive && p <= 0.0)) {
                throw ValidationError("price panel: price must be finite and strictly positive",
                                      static_cast<std::size_t>(k) + 1,
                                      static_cast<std::size_t>(i) + 1);
            }
        }
    }
    if (quantities_) {
        if (quantities_->rows() != prices_.rows() || quantities_->cols() != prices_.cols()) {
            throw ValidationError("price panel: quantity matrix shape differs from prices");
        }
        if (!quantities_->allFinite()) throw ValidationError("price panel: non-finite quantity");
    }
}

PricePanel PricePanel::with_quantities(Eigen::MatrixXd quantities) const {
    PricePanel out(grid_, prices_, asset_ids_, std::move(quantities), domain_);
    out.cash_column_ = cash_column_;
    out.dates_ = dates_;
    return out;
}

PricePanel PricePanel::with_cash_column(std::optional<std::size_t> column) const {
    if (column && *column >= n_assets()) throw ValidationError("price panel: cash column out of range");
    PricePanel out = *this;
    out.cash_column_ = column;
    return out;
}

PricePanel PricePanel::with_dates(std::vector<std::string> dates) const {
    if (!dates.empty() && dates.size() != grid_.nodes()) {
        throw ValidationError("price panel: one date per row required");
    }
    PricePanel out = *this;
    out.dates_ = std::move(dates);
    return out;
}

Series PricePanel::price_series(std::size_t column) const {
    if (column >= n_assets()) throw ValidationError("price panel: column out of range");
    std::vector<double> v(grid_.nodes());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = prices_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(column));
    return Series(grid_, std::move(v));
}

// ---------------------------------------------------------------------------
// Gauge fields

GaugeScalar::GaugeScalar(Series phi) : phi_(std::move(phi)) {
    if (phi_.layout() != Layout::nodes) throw ValidationError("gauge scalar: phi must be sampled at grid nodes");
    for (double v : phi_.values()) {
        if (!std::isfinite(v)) throw ValidationError("gauge scalar: phi must be finite");
    }
}

GaugeScalar GaugeScalar::zero(const TimeGrid& grid) {
    return GaugeScalar(Series::constant(grid, Layout::nodes, 0.0));
}

Series GaugeScalar::rate() const {
    const auto& g = phi_.grid();
    std::vector<double> r(g.steps());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = (phi_[k + 1] - phi_[k]) / g.dt();
    return Series(g, std::move(r));
}

GaugeScalar GaugeScalar::negated() const {
    std::vector<double> v(phi_.values().begin(), phi_.values().end());
    for (double& x : v) x = -x;
    return GaugeScalar(Series(phi_.grid(), std::move(v)));
}

GaugeFieldA::GaugeFieldA(Series a) : a_(std::move(a)) {
    if (a_.layout() != Layout::intervals) throw ValidationError("gauge field A: one value per interval required");
    for (double v : a_.values()) {
        if (!std::isfinite(v)) throw ValidationError("gauge field A: values must be finite");
    }
}

GaugeFieldA GaugeFieldA::zero(const TimeGrid& grid) { return constant(grid, 0.0); }

GaugeFieldA GaugeFieldA::constant(const TimeGrid& grid, double value) {
    return GaugeFieldA(Series::constant(grid, Layout::intervals, value));
}

TradeUnitMap::TradeUnitMap(TimeGrid grid, std::vector<Eigen::MatrixXd> b) : grid_(grid), b_(std::move(b)) {
    if (b_.size() != grid_.nodes()) throw ValidationError("trade-unit map: one matrix per grid node required");
    const Eigen::Index n = b_.front().rows();
    b_inv_.reserve(b_.size());
    for (std::size_t k = 0; k < b_.size(); ++k) {
        const auto& m = b_[k];
        if (m.rows() != n || m.cols() != n || n == 0) {
            throw ValidationError("trade-unit map: matrices must be square with a common size");
        }
        if (!m.allFinite()) throw ValidationError("trade-unit map: non-finite entry at node " + std::to_string(k));
        if (condition_number(m) > max_condition) {
            throw ValidationError("trade-unit map: numerically singular matrix at node " + std::to_string(k));
        }
        b_inv_.push_back(m.inverse());
    }
}

TradeUnitMap TradeUnitMap::identity(const TimeGrid& grid, std::size_t n) {
    const auto dim = static_cast<Eigen::Index>(n);
    return TradeUnitMap(grid, std::vector<Eigen::MatrixXd>(grid.nodes(), Eigen::MatrixXd::Identity(dim, dim)));
}

TradeUnitMap TradeUnitMap::compose(const TradeUnitMap& other) const {
    require_same_grid(grid_, other.grid_, "trade-unit compose");
    std::vector<Eigen::MatrixXd> prod(b_.size());
    for (std::size_t k = 0; k < b_.size(); ++k) prod[k] = b_[k] * other.b_.at(k);
    return TradeUnitMap(grid_, std::move(prod));
}

GaugeFieldB::GaugeFieldB(TimeGrid grid, std::vector<Eigen::MatrixXd> fields, std::optional<std::size_t> option_block)
    : grid_(grid), dense_(std::move(fields)), option_block_(option_block) {
    if (dense_.size() != grid_.steps()) throw ValidationError("gauge field B: one matrix per interval required");
    n_ = static_cast<std::size_t>(dense_.front().rows());
    for (const auto& m : dense_) {
        if (static_cast<std::size_t>(m.rows()) != n_ || static_cast<std::size_t>(m.cols()) != n_) {
            throw ValidationError("gauge field B: matrices must be square with a common size");
        }
        if (!m.allFinite()) throw ValidationError("gauge field B: non-finite entry");
    }
    if (option_block_) {
        const auto m = static_cast<Eigen::Index>(*option_block_);
        const auto n = static_cast<Eigen::Index>(n_);
        if (m > n) throw ValidationError("gauge field B: option block larger than the field");
        for (const auto& f : dense_) {
            if ((f.topRightCorner(m, n - m).array() != 0.0).any() ||
                (f.bottomLeftCorner(n - m, m).array() != 0.0).any()) {
                throw ValidationError("gauge field B: off-diagonal option/asset blocks must be exactly zero");
            }
        }
    }
}

GaugeFieldB GaugeFieldB::diagonal(TimeGrid grid, Eigen::MatrixXd diagonal) {
    if (static_cast<std::size_t>(diagonal.rows()) != grid.steps()) {
        throw ValidationError("gauge field B: diagonal needs one row per interval");
    }
    if (!diagonal.allFinite()) throw ValidationError("gauge field B: non-finite entry");
    GaugeFieldB out(grid, static_cast<std::size_t>(diagonal.cols()));
    out.diagonal_ = std::move(diagonal);
    return out;
}

GaugeFieldB GaugeFieldB::zero(const TimeGrid& grid, std::size_t n) {
    return diagonal(grid, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.steps()), static_cast<Eigen::Index>(n)));
}

Eigen::MatrixXd GaugeFieldB::matrix(std::size_t k) const {
    if (diagonal_) return diagonal_->row(static_cast<Eigen::Index>(k)).transpose().asDiagonal();
    return dense_.at(k);
}

Eigen::VectorXd GaugeFieldB::apply(std::size_t k, const Eigen::VectorXd& v) const {
    if (diagonal_) return diagonal_->row(static_cast<Eigen::Index>(k)).transpose().cwiseProduct(v);
    return dense_.at(k) * v;
}

double GaugeFieldB::max_abs() const {
    if (diagonal_) return diagonal_->cwiseAbs().maxCoeff();
    double m = 0.0;
    for (const auto& f : dense_) m = std::max(m, f.cwiseAbs().maxCoeff());
    return m;
}

// ---------------------------------------------------------------------------
// Operations

double portfolio_value(const PricePanel& panel, std::size_t k) {
    if (!panel.quantities()) throw ValidationError("no holdings: panel carries no quantities");
    if (k >= panel.grid().nodes()) throw ValidationError("portfolio value: time index out of range");
    const auto row = static_cast<Eigen::Index>(k);
    return panel.prices().row(row).dot(panel.quantities()->row(row));
}

PricePanel apply_price_gauge(const PricePanel& panel, const GaugeScalar& phi) {
    require_same_grid(panel.grid(), phi.grid(), "price gauge");
    Eigen::MatrixXd prices = panel.prices();
    for (Eigen::Index k = 0; k < prices.rows(); ++k) prices.row(k) *= std::exp(phi.phi()[static_cast<std::size_t>(k)]);
    PricePanel out(panel.grid(), std::move(prices), panel.asset_ids(), panel.quantities(), panel.domain());
    return out.with_cash_column(panel.cash_column()).with_dates(panel.dates());
}

PricePanel apply_trade_unit_gauge(const PricePanel& panel, const TradeUnitMap& b) {
    require_same_grid(panel.grid(), b.grid(), "trade-unit gauge");
    if (b.dimension() != panel.n_assets()) throw ValidationError("trade-unit gauge: map dimension differs from panel");
    Eigen::MatrixXd prices(panel.prices().rows(), panel.prices().cols());
    std::optional<Eigen::MatrixXd> quantities;
    if (panel.quantities()) quantities = Eigen::MatrixXd(prices.rows(), prices.cols());
    for (Eigen::Index k = 0; k < prices.rows(); ++k) {
        const auto node = static_cast<std::size_t>(k);
        prices.row(k) = (b.inverse(node).transpose() * panel.prices().row(k).transpose()).transpose();
        if (quantities) quantities->row(k) = (b.at(node) * panel.quantities()->row(k).transpose()).transpose();
    }
    // Units are now linear combinations; the cash tag no longer names a column.
    return PricePanel(panel.grid(), std::move(prices), panel.asset_ids(), std::move(quantities),
                      PriceDomain::signed_combination)
        .with_dates(panel.dates());
}

GaugeFieldA transform_gauge_a(const GaugeFieldA& a, const GaugeScalar& phi) {
    require_same_grid(a.grid(), phi.grid(), "gauge field A transform");
    const Series rate = phi.rate();
    std::vector<double> out(a.a().size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] - rate[k];
    return GaugeFieldA(Series(a.grid(), std::move(out)));
}

GaugeFieldB transform_gauge_b(const GaugeFieldB& field, const TradeUnitMap& b) {
    require_same_grid(field.grid(), b.grid(), "gauge field B transform");
    if (b.dimension() != field.dimension()) throw ValidationError("gauge field B transform: dimension mismatch");
    const auto n = static_cast<Eigen::Index>(field.dimension());
    if (const auto m = field.option_block()) {
        const auto mm = static_cast<Eigen::Index>(*m);
        for (std::size_t k = 0; k < b.grid().nodes(); ++k) {
            const auto& bk = b.at(k);
            if ((bk.topRightCorner(mm, n - mm).array() != 0.0).any() ||
                (bk.bottomLeftCorner(n - mm, mm).array() != 0.0).any()) {
                throw ValidationError("gauge field B transform: map mixes options and assets at node " +
                                      std::to_string(k));
            }
        }
    }
    const double dt = field.grid().dt();
    std::vector<Eigen::MatrixXd> out(field.grid().steps());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const Eigen::MatrixXd transport = (-field.matrix(k) * dt).exp();
        const Eigen::MatrixXd moved = b.at(k + 1) * transport * b.inverse(k);
        Eigen::MatrixXd next = -moved.log() / dt;
        if (!next.allFinite()) {
            throw ComputationError("gauge field B transform: transport has no real logarithm on interval " +
                                   std::to_string(k) + " (step too coarse for this map)");
        }
        if (field.option_block()) {
            const auto mm = static_cast<Eigen::Index>(*field.option_block());
            next.topRightCorner(mm, n - mm).setZero();
            next.bottomLeftCorner(n - mm, mm).setZero();
        }
        out[k] = std::move(next);
    }
    return GaugeFieldB(field.grid(), std::move(out), field.option_block());
}

ReturnSeries nominal_return(const Series& values) {
    if (values.layout() != Layout::nodes) throw ValidationError("nominal return: values must be sampled at nodes");
    const auto& g = values.grid();
    std::vector<double> r(g.steps());
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(values[k] > 0.0) || !std::isfinite(values[k])) {
            throw ValidationError("nominal return: value at node " + std::to_string(k) + " is not positive");
        }
    }
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = std::log(values[k + 1] / values[k]) / g.dt();
    return {Series(g, std::move(r)), ReturnKind::nominal};
}

ReturnSeries real_return(const Series& values, const GaugeFieldA& a) {
    require_same_grid(values.grid(), a.grid(), "real return");
    ReturnSeries nominal = nominal_return(values);
    std::vector<double> r(nominal.values.values().begin(), nominal.values.values().end());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] += a[k];
    return {Series(values.grid(), std::move(r)), ReturnKind::real};
}

}  // namespace gaugekit
