#pragma once

// Monte Carlo engine for environment-driven log-normal price processes
//
//   ds_i = mu_i(xi(t)) s_i dt + sigma_i(xi(t)) s_i dZ_i,
//
// with independent unit-variance noises, plus stochastic numeraire changes
// s' = Y s and the covariation observable between Y and a portfolio.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gaugekit/gauge_core.hpp"
#include "gaugekit/rng.hpp"
#include "gaugekit/time_grid.hpp"

namespace gaugekit {

/// Deterministic environment factors xi(t), one row per grid node.
struct EnvironmentSeries {
    using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    TimeGrid grid;
    Matrix xi;  ///< [nodes x n_factors]

    static EnvironmentSeries constant(const TimeGrid& grid, std::size_t n_factors, double value = 0.0);
    std::span<const double> at(std::size_t k) const;
    std::size_t n_factors() const noexcept { return static_cast<std::size_t>(xi.cols()); }
};

/// Parameter functional: (asset index, environment factors) -> rate.
using ParameterFn = std::function<double(std::size_t, std::span<const double>)>;

class ProcessSpec {
public:
    /// Non-normal noise laws are moment-checked here (mean 0, variance 1).
    ProcessSpec(std::size_t n_assets, ParameterFn mu, ParameterFn sigma, NoiseKind noise = NoiseKind::normal,
                double initial_price = 1.0);

    static ProcessSpec constant(std::size_t n_assets, double mu, double sigma, NoiseKind noise = NoiseKind::normal);
    /// Per-asset constants.
    static ProcessSpec from_vectors(std::vector<double> mu, std::vector<double> sigma,
                                    NoiseKind noise = NoiseKind::normal);

    std::size_t n_assets() const noexcept { return n_assets_; }
    NoiseKind noise() const noexcept { return noise_; }
    double initial_price() const noexcept { return initial_price_; }

    double mu(std::size_t asset, std::span<const double> xi) const;
    /// Throws ValidationError when the functional yields a negative volatility.
    double sigma(std::size_t asset, std::span<const double> xi) const;

private:
    std::size_t n_assets_;
    ParameterFn mu_;
    ParameterFn sigma_;
    NoiseKind noise_;
    double initial_price_;
};

/// Per-interval log-step coefficients: ln s_{k+1} - ln s_k = drift(k,i) + vol(k,i) z.
struct ProcessTable {
    Eigen::MatrixXd drift;  ///< (mu - sigma^2/2) dt, [steps x assets]
    Eigen::MatrixXd vol;    ///< sigma sqrt(dt), [steps x assets]
};

/// Evaluates the parameter functionals at xi(t_k) for the first `n_assets`
/// assets (all of them when 0).
ProcessTable build_process_table(const ProcessSpec& spec, const EnvironmentSeries& env, const TimeGrid& grid,
                                 std::size_t n_assets = 0);

/// Simulated prices, indexed (path, node, asset).
class PathSet {
public:
    PathSet(TimeGrid grid, std::size_t n_paths, std::size_t n_assets, std::uint64_t seed, NoiseKind noise,
            std::vector<double> data);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t n_paths() const noexcept { return n_paths_; }
    std::size_t n_assets() const noexcept { return n_assets_; }
    /// Seed and noise law of the asset noises that generated the paths.
    std::uint64_t seed() const noexcept { return seed_; }
    NoiseKind noise() const noexcept { return noise_; }

    double at(std::size_t path, std::size_t node, std::size_t asset) const {
        return data_[(path * grid_.nodes() + node) * n_assets_ + asset];
    }
    const std::vector<double>& data() const noexcept { return data_; }

    /// One path as a [nodes x assets] matrix.
    Eigen::MatrixXd path(std::size_t p) const;
    /// Prices of one asset across all paths, [paths x nodes].
    Eigen::MatrixXd asset(std::size_t i) const;
    /// One path as a price panel with labels "asset-0".."asset-(N-1)".
    PricePanel to_panel(std::size_t p) const;

private:
    TimeGrid grid_;
    std::size_t n_paths_;
    std::size_t n_assets_;
    std::uint64_t seed_;
    NoiseKind noise_;
    std::vector<double> data_;
};

/// Exact log-normal stepping with parameters frozen at the left node of each
/// interval. Output is bit-identical for any `threads` (0 = default count).
PathSet simulate(const ProcessSpec& spec, const EnvironmentSeries& env, const TimeGrid& grid, std::size_t n_paths,
                 std::uint64_t seed, std::size_t threads = 0);

struct PortfolioDynamics {
    Eigen::MatrixXd values;   ///< portfolio value per path, [paths x nodes], starting at 1
    Eigen::MatrixXd returns;  ///< log-return rates per path, [paths x steps]
    double sigma_hat = 0.0;   ///< realized volatility of the portfolio (1/sqrt(years))
    std::optional<double> sigma_hat_analytic;  ///< sqrt(sum w_i^2 sigma_i^2)
};

/// Portfolio held at constant weights (q^i = w^i Pi / s_i, restored every step).
/// Pass per-asset constant volatilities to also get the analytic sigma-hat.
PortfolioDynamics portfolio_dynamics(const PathSet& paths, const Eigen::VectorXd& weights,
                                     const std::optional<Eigen::VectorXd>& sigmas = std::nullopt);

enum class NumeraireMode { stochastic, deterministic };

/// dY/Y = phi_mu dt + phi_sigma dZ_phi with corr(dZ_phi, dZ_i) = rho_i.
struct NumeraireSpec {
    double phi_mu = 0.0;
    double phi_sigma = 0.0;
    Eigen::VectorXd rho;  ///< one correlation per asset; empty means all zero
    NumeraireMode mode = NumeraireMode::stochastic;

    static NumeraireSpec deterministic(double phi_mu);
    /// Throws unless |rho_i| <= 1, sum rho_i^2 <= 1 and deterministic mode has phi_sigma = 0.
    void validate(std::size_t n_assets) const;
};

/// Samples Y along every path, [paths x nodes], Y(t0) = 1. The asset noises are
/// regenerated from the path set's seed; the independent residual uses seed2.
Eigen::MatrixXd simulate_numeraire(const PathSet& paths, const NumeraireSpec& y, std::uint64_t seed2);

/// s' = Y s on every path.
PathSet apply_numeraire(const PathSet& paths, const NumeraireSpec& y, std::uint64_t seed2);

struct CrossTermEstimate {
    double estimate = 0.0;        ///< d<ln Y, ln Pi>/dt
    double standard_error = 0.0;
};

/// Realized covariation of ln Y and ln Pi per unit time from jointly sampled
/// paths ([paths x nodes] each). Increments are demeaned across paths per step.
CrossTermEstimate cross_term(const Eigen::MatrixXd& paths_y, const Eigen::MatrixXd& paths_pi, const TimeGrid& grid);

/// Volatility of a sample of return streams, [samples x intervals]: the
/// ensemble standard deviation (population form, E[(r - E r)^2]) per interval,
/// pooled as the root mean variance across intervals.
double return_volatility(const Eigen::MatrixXd& samples);
double return_volatility(const std::vector<ReturnSeries>& samples);

}  // namespace gaugekit
