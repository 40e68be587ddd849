#include "gaugekit/riskfree.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "gaugekit/error.hpp"
#include "gaugekit/parallel.hpp"

namespace gaugekit {

namespace {

std::size_t resolve_threads(std::size_t threads) { return threads == 0 ? default_thread_count() : threads; }

}  // namespace

// ---------------------------------------------------------------------------
// WeightVector

WeightVector::WeightVector(Eigen::VectorXd w, WeightScheme scheme) : w_(std::move(w)), scheme_(scheme) {
    if (w_.size() == 0) throw ValidationError("weights: empty weight vector");
    if (!w_.allFinite()) throw ValidationError("weights: non-finite weight");
    if (std::abs(w_.sum() - 1.0) > 1e-12) {
        throw ValidationError("weights: must sum to one (sum = " + std::to_string(w_.sum()) + ")");
    }
}

WeightVector WeightVector::equal(std::size_t n) {
    if (n == 0) throw ValidationError("weights: need at least one asset");
    return WeightVector(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)),
                        WeightScheme::equal);
}

WeightVector WeightVector::normalized(Eigen::VectorXd raw) {
    const double sum = raw.sum();
    if (!(sum > 0.0) || !std::isfinite(sum)) throw ValidationError("weights: raw weights must have a positive sum");
    raw /= sum;
    // Absorb the last rounding residue so the sum invariant holds to 1e-12.
    raw(raw.size() - 1) += 1.0 - raw.sum();
    return WeightVector(std::move(raw), WeightScheme::custom);
}

WeightVector WeightVector::random_positive(std::size_t n, std::uint64_t seed, double low, double high) {
    if (n == 0) throw ValidationError("weights: need at least one asset");
    if (!(low > 0.0) || !(high >= low)) throw ValidationError("weights: need 0 < low <= high");
    const NoiseSource source(seed, NoiseKind::uniform);
    Eigen::VectorXd raw(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        raw(static_cast<Eigen::Index>(i)) = low + (high - low) * source.uniform(i, 0, 0, 2);
    }
    return normalized(std::move(raw));
}

bool WeightVector::is_riskfree_candidate(double cap) const {
    const double limit = cap / static_cast<double>(w_.size());
    return (w_.array() > 0.0).all() && w_.maxCoeff() <= limit * (1.0 + 1e-12);
}

void WeightVector::require_riskfree_candidate(double cap) const {
    const double limit = cap / static_cast<double>(w_.size());
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
        if (!(w_(i) > 0.0)) {
            throw ValidationError("weights: entry " + std::to_string(i) +
                                  " is not positive; risk-free portfolios are long-only without leverage");
        }
        if (w_(i) > limit * (1.0 + 1e-12)) {
            throw ValidationError("weights: entry " + std::to_string(i) + " exceeds the diversification cap " +
                                  std::to_string(cap) + "/N");
        }
    }
}

WeightVector WeightVector::prefix(std::size_t n) const {
    if (n == 0 || n > size()) throw ValidationError("weights: prefix size out of range");
    return normalized(w_.head(static_cast<Eigen::Index>(n)));
}

// ---------------------------------------------------------------------------
// Price insensitivity

InsensitivityReport insensitivity_residual(const PricePanel& panel, const Eigen::MatrixXd& deltas, std::size_t k,
                                           std::optional<double> tolerance) {
    if (!panel.quantities()) throw ValidationError("insensitivity: no holdings in panel");
    if (k >= panel.grid().nodes()) throw ValidationError("insensitivity: time index out of range");
    if (static_cast<std::size_t>(deltas.rows()) != panel.n_assets()) {
        throw ValidationError("insensitivity: deltas have " + std::to_string(deltas.rows()) + " rows for " +
                              std::to_string(panel.n_assets()) + " instruments");
    }
    const Eigen::VectorXd holdings = panel.quantities()->row(static_cast<Eigen::Index>(k)).transpose();
    InsensitivityReport out;
    out.residual = deltas.transpose() * holdings;
    out.max_abs = out.residual.size() ? out.residual.cwiseAbs().maxCoeff() : 0.0;
    out.tolerance = tolerance.value_or(1e-8 * holdings.norm() * deltas.norm());
    out.insensitive = out.max_abs <= out.tolerance;
    return out;
}

double delta_hedge(double option_delta, double option_qty) { return -option_qty * option_delta; }

// ---------------------------------------------------------------------------
// Market gauge

namespace {

MarketGaugeResult gauge_from_holdings(const PricePanel& panel, Eigen::MatrixXd q,
                                      std::optional<double> inception = std::nullopt) {
    const auto& grid = panel.grid();
    const auto nodes = static_cast<Eigen::Index>(grid.nodes());
    const auto n = q.cols();
    std::vector<double> value(grid.nodes());
    for (Eigen::Index k = 0; k < nodes; ++k) {
        value[static_cast<std::size_t>(k)] = panel.prices().row(k).dot(q.row(k));
        if (!(value[static_cast<std::size_t>(k)] > 0.0) || !std::isfinite(value[static_cast<std::size_t>(k)])) {
            throw ComputationError("market gauge: portfolio value is not positive at node " + std::to_string(k));
        }
    }
    // Weight-built portfolios start from one unit of capital; s.q differs from it by rounding only.
    if (inception) value[0] = *inception;
    std::vector<double> a(grid.steps());
    Eigen::MatrixXd b_diag(nodes - 1, n);
    for (Eigen::Index k = 0; k + 1 < nodes; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        a[kk] = -std::log(value[kk + 1] / value[kk]) / grid.dt();
        for (Eigen::Index i = 0; i < n; ++i) b_diag(k, i) = std::log(q(k + 1, i) / q(k, i)) / grid.dt();
    }
    return {GaugeFieldA(Series(grid, std::move(a))), GaugeFieldB::diagonal(grid, std::move(b_diag)),
            Series(grid, std::move(value)), std::move(q)};
}

}  // namespace

MarketGaugeResult extract_market_gauge(const PricePanel& panel, const WeightVector& w, RebalancePolicy policy) {
    if (panel.domain() != PriceDomain::positive) throw ValidationError("market gauge: prices must be positive");
    if (w.size() != panel.n_assets()) {
        throw ValidationError("market gauge: " + std::to_string(w.size()) + " weights for " +
                              std::to_string(panel.n_assets()) + " assets");
    }
    if (!(w.w().array() > 0.0).all()) throw ValidationError("market gauge: weights must be strictly positive");
    const auto& s = panel.prices();
    const auto nodes = s.rows();
    const auto n = s.cols();
    Eigen::MatrixXd q(nodes, n);
    q.row(0) = w.w().transpose().cwiseQuotient(s.row(0));
    for (Eigen::Index k = 0; k + 1 < nodes; ++k) {
        const bool rebalance = policy.every > 0 && static_cast<std::size_t>(k + 1) % policy.every == 0;
        if (rebalance) {
            // Self-financing: the new holdings cost what the old ones are worth now.
            const double value = s.row(k + 1).dot(q.row(k));
            q.row(k + 1) = (w.w().transpose() * value).cwiseQuotient(s.row(k + 1));
        } else {
            q.row(k + 1) = q.row(k);
        }
    }
    return gauge_from_holdings(panel, std::move(q), 1.0);
}

MarketGaugeResult extract_market_gauge(const PricePanel& panel) {
    if (!panel.quantities()) throw ValidationError("market gauge: no holdings in panel");
    if (!(panel.quantities()->array() > 0.0).all()) {
        throw ValidationError("market gauge: held quantities must be positive");
    }
    return gauge_from_holdings(panel, *panel.quantities());
}

BalanceResiduals balance_residuals(const PricePanel& panel, const MarketGaugeResult& gauge) {
    const auto& s = panel.prices();
    const auto& q = gauge.quantities;
    if (s.rows() != q.rows() || s.cols() != q.cols()) throw ValidationError("balance: shape mismatch");
    const double dt = panel.grid().dt();
    BalanceResiduals out;
    for (Eigen::Index k = 0; k + 1 < s.rows(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        double price_term = 0.0;  // s-dot . q
        double flow_term = 0.0;   // s . q-dot
        for (Eigen::Index i = 0; i < s.cols(); ++i) {
            const double position = s(k, i) * q(k, i);
            price_term += position * std::log(s(k + 1, i) / s(k, i)) / dt;
            flow_term += position * std::log(q(k + 1, i) / q(k, i)) / dt;
        }
        const Eigen::VectorXd bq = gauge.b_n.apply(kk, q.row(k).transpose());
        const double sbq = s.row(k).dot(bq);
        const double value = s.row(k).dot(q.row(k));
        out.price_balance = std::max(out.price_balance, std::abs(price_term + gauge.a[kk] * value + sbq) / value);
        out.flow_balance = std::max(out.flow_balance, std::abs(flow_term - sbq) / value);
    }
    return out;
}

PricePanel to_riskfree_units(const PricePanel& panel, const Series& riskfree_values) {
    if (!(riskfree_values.grid() == panel.grid()) || riskfree_values.layout() != Layout::nodes) {
        throw ValidationError("risk-free units: divisor must be sampled on the panel's grid nodes");
    }
    Eigen::MatrixXd prices = panel.prices();
    for (Eigen::Index k = 0; k < prices.rows(); ++k) {
        const double divisor = riskfree_values[static_cast<std::size_t>(k)];
        if (!(divisor > 0.0) || !std::isfinite(divisor)) {
            throw ComputationError("risk-free units: zero or invalid divisor at node " + std::to_string(k));
        }
        prices.row(k) /= divisor;
    }
    return PricePanel(panel.grid(), std::move(prices), panel.asset_ids(), panel.quantities(), panel.domain())
        .with_cash_column(panel.cash_column())
        .with_dates(panel.dates());
}

// ---------------------------------------------------------------------------
// Diversification studies

std::pair<double, double> fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("log-log fit: length mismatch");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
            pts.emplace_back(std::log(x[i]), std::log(y[i]));
        }
    }
    if (pts.size() < 3) throw ComputationError("log-log fit: fewer than 3 finite points");
    double mx = 0.0, my = 0.0;
    for (const auto& [lx, ly] : pts) {
        mx += lx;
        my += ly;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [lx, ly] : pts) {
        sxx += (lx - mx) * (lx - mx);
        sxy += (lx - mx) * (ly - my);
    }
    if (!(sxx > 0.0)) throw ComputationError("log-log fit: all sizes identical");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

ScalingReport convergence_study(const ProcessSpec& spec, const EnvironmentSeries& env, const TimeGrid& grid,
                                const std::vector<std::size_t>& sizes, const StudyOptions& options) {
    if (sizes.size() < 4) throw ValidationError("convergence study: need at least 4 universe sizes");
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        if (sizes[j] == 0 || (j > 0 && sizes[j] <= sizes[j - 1])) {
            throw ValidationError("convergence study: sizes must be positive and strictly increasing");
        }
    }
    if (options.n_paths < 2) throw ValidationError("convergence study: need at least two paths");
    const std::size_t n_max = sizes.back();
    const ProcessTable table = build_process_table(spec, env, grid, n_max);
    const NoiseSource noise(options.seed, spec.noise());
    const std::size_t n_sizes = sizes.size();
    const std::size_t steps = grid.steps();
    const std::size_t n_paths = options.n_paths;
    // log gross returns, laid out [size][path][step]
    std::vector<double> log_returns(n_sizes * n_paths * steps);

    parallel_for(n_paths, resolve_threads(options.threads), [&](std::size_t p) {
        for (std::size_t k = 0; k < steps; ++k) {
            const auto row = static_cast<Eigen::Index>(k);
            double gross_sum = 0.0;
            std::size_t j = 0;
            for (std::size_t i = 0; i < n_max; ++i) {
                const auto col = static_cast<Eigen::Index>(i);
                const double vol = table.vol(row, col);
                const double z = vol != 0.0 ? noise.draw(p, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k)) : 0.0;
                gross_sum += std::exp(table.drift(row, col) + vol * z);
                if (i + 1 == sizes[j]) {
                    log_returns[(j * n_paths + p) * steps + k] = std::log(gross_sum / static_cast<double>(sizes[j]));
                    ++j;
                }
            }
        }
    });

    ScalingReport report;
    report.sizes = sizes;
    const auto xi0 = env.at(0);
    for (std::size_t j = 0; j < n_sizes; ++j) {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> sample(
            log_returns.data() + j * n_paths * steps, static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(steps));
        report.sigma_hat_realized.push_back(return_volatility(Eigen::MatrixXd(sample)) / std::sqrt(grid.dt()));
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < sizes[j]; ++i) {
            const double s = spec.sigma(i, xi0);
            sum_sq += s * s;
        }
        report.sigma_hat_analytic.push_back(std::sqrt(sum_sq) / static_cast<double>(sizes[j]));
    }
    std::vector<double> xs(sizes.begin(), sizes.end());
    std::tie(report.slope, report.intercept) = fit_log_log(xs, report.sigma_hat_realized);
    report.analytic_slope = fit_log_log(xs, report.sigma_hat_analytic).first;
    return report;
}

DivergenceReport etemadi_check(const ProcessSpec& spec, const EnvironmentSeries& env, const TimeGrid& grid,
                               const WeightVector& weight_a, const WeightVector& weight_b, double cap,
                               const StudyOptions& options, std::size_t min_size) {
    if (weight_a.size() != weight_b.size()) throw ValidationError("etemadi check: weight vectors differ in length");
    weight_a.require_riskfree_candidate(cap);
    weight_b.require_riskfree_candidate(cap);
    const std::size_t n = weight_a.size();
    if (n > spec.n_assets()) throw ValidationError("etemadi check: more weights than assets in the spec");
    if (options.n_paths < 1) throw ValidationError("etemadi check: need at least one path");

    std::vector<std::size_t> sizes;
    for (std::size_t m = std::max<std::size_t>(1, min_size); m < n; m *= 2) sizes.push_back(m);
    sizes.push_back(n);

    const ProcessTable table = build_process_table(spec, env, grid, n);
    const NoiseSource noise(options.seed, spec.noise());
    const std::size_t n_sizes = sizes.size();
    const std::size_t n_paths = options.n_paths;
    const Eigen::VectorXd& wa = weight_a.w();
    const Eigen::VectorXd& wb = weight_b.w();
    // Prefix sums of the weights for renormalisation on each sub-universe.
    std::vector<double> norm_a(n_sizes), norm_b(n_sizes);
    for (std::size_t j = 0; j < n_sizes; ++j) {
        norm_a[j] = wa.head(static_cast<Eigen::Index>(sizes[j])).sum();
        norm_b[j] = wb.head(static_cast<Eigen::Index>(sizes[j])).sum();
    }
    std::vector<double> gap(n_sizes * n_paths);

    parallel_for(n_paths, resolve_threads(options.threads), [&](std::size_t p) {
        std::vector<double> cum_a(n_sizes, 0.0), cum_b(n_sizes, 0.0);
        for (std::size_t k = 0; k < grid.steps(); ++k) {
            const auto row = static_cast<Eigen::Index>(k);
            double sum_a = 0.0, sum_b = 0.0;
            std::size_t j = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto col = static_cast<Eigen::Index>(i);
                const double vol = table.vol(row, col);
                const double z = vol != 0.0 ? noise.draw(p, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k)) : 0.0;
                const double gross = std::exp(table.drift(row, col) + vol * z);
                sum_a += wa(col) * gross;
                sum_b += wb(col) * gross;
                if (i + 1 == sizes[j]) {
                    cum_a[j] += std::log(sum_a / norm_a[j]);
                    cum_b[j] += std::log(sum_b / norm_b[j]);
                    ++j;
                }
            }
        }
        for (std::size_t j = 0; j < n_sizes; ++j) gap[j * n_paths + p] = cum_a[j] - cum_b[j];
    });

    DivergenceReport report;
    report.sizes = sizes;
    for (std::size_t j = 0; j < n_sizes; ++j) {
        double sum_sq = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) sum_sq += gap[j * n_paths + p] * gap[j * n_paths + p];
        report.divergence.push_back(std::sqrt(sum_sq / static_cast<double>(n_paths)));
    }
    report.terminal = report.divergence.back();
    return report;
}

}  // namespace gaugekit
