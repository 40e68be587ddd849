#include "gaugekit/stochastic_sim.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gaugekit/error.hpp"
#include "gaugekit/parallel.hpp"

namespace gaugekit {

namespace {

// Moment check for the rescaled non-normal laws. The sample is fixed, so the
// check is deterministic; tolerances sit far outside its sampling error.
void check_unit_moments(NoiseKind kind) {
    constexpr std::uint32_t n = 200000;
    const NoiseSource src(0x5EEDu, kind);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        const double z = src.draw(i, 0, 0, 0xFFFF);
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    if (std::abs(mean) > 0.02 || std::abs(var - 1.0) > 0.02) {
        throw ValidationError("noise law " + to_string(kind) + " does not have zero mean and unit variance");
    }
}

std::size_t resolve_threads(std::size_t threads) { return threads == 0 ? default_thread_count() : threads; }

}  // namespace

EnvironmentSeries EnvironmentSeries::constant(const TimeGrid& grid, std::size_t n_factors, double value) {
    return {grid, Matrix::Constant(static_cast<Eigen::Index>(grid.nodes()),
                                            static_cast<Eigen::Index>(n_factors), value)};
}

std::span<const double> EnvironmentSeries::at(std::size_t k) const {
    if (k >= grid.nodes()) throw ValidationError("environment: node index out of range");
    return {xi.data() + k * static_cast<std::size_t>(xi.cols()), static_cast<std::size_t>(xi.cols())};
}

ProcessSpec::ProcessSpec(std::size_t n_assets, ParameterFn mu, ParameterFn sigma, NoiseKind noise,
                         double initial_price)
    : n_assets_(n_assets), mu_(std::move(mu)), sigma_(std::move(sigma)), noise_(noise), initial_price_(initial_price) {
    if (n_assets_ == 0) throw ValidationError("process spec: need at least one asset");
    if (!mu_ || !sigma_) throw ValidationError("process spec: drift and volatility functionals are required");
    if (!(initial_price_ > 0.0) || !std::isfinite(initial_price_)) {
        throw ValidationError("process spec: initial price must be positive");
    }
    if (noise_ != NoiseKind::normal) check_unit_moments(noise_);
}

ProcessSpec ProcessSpec::constant(std::size_t n_assets, double mu, double sigma, NoiseKind noise) {
    return ProcessSpec(
        n_assets, [mu](std::size_t, std::span<const double>) { return mu; },
        [sigma](std::size_t, std::span<const double>) { return sigma; }, noise);
}

ProcessSpec ProcessSpec::from_vectors(std::vector<double> mu, std::vector<double> sigma, NoiseKind noise) {
    if (mu.size() != sigma.size()) throw ValidationError("process spec: drift and volatility lengths differ");
    const std::size_t n = mu.size();
    return ProcessSpec(
        n, [m = std::move(mu)](std::size_t i, std::span<const double>) { return m.at(i); },
        [s = std::move(sigma)](std::size_t i, std::span<const double>) { return s.at(i); }, noise);
}

double ProcessSpec::mu(std::size_t asset, std::span<const double> xi) const {
    const double v = mu_(asset, xi);
    if (!std::isfinite(v)) throw ValidationError("process spec: non-finite drift for asset " + std::to_string(asset));
    return v;
}

double ProcessSpec::sigma(std::size_t asset, std::span<const double> xi) const {
    const double v = sigma_(asset, xi);
    if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("process spec: negative or non-finite volatility for asset " + std::to_string(asset));
    }
    return v;
}

ProcessTable build_process_table(const ProcessSpec& spec, const EnvironmentSeries& env, const TimeGrid& grid,
                                 std::size_t n_assets) {
    if (!(env.grid == grid)) throw ValidationError("simulate: environment grid differs from simulation grid");
    if (n_assets == 0) n_assets = spec.n_assets();
    if (n_assets > spec.n_assets()) throw ValidationError("simulate: more assets requested than the spec defines");
    const auto steps = static_cast<Eigen::Index>(grid.steps());
    const auto n = static_cast<Eigen::Index>(n_assets);
    ProcessTable table{Eigen::MatrixXd(steps, n), Eigen::MatrixXd(steps, n)};
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    if (static_cast<std::size_t>(env.xi.rows()) != grid.nodes()) {
        throw ValidationError("simulate: environment needs one factor row per grid node");
    }
    for (Eigen::Index k = 0; k < steps; ++k) {
        const auto xi = env.at(static_cast<std::size_t>(k));
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto asset = static_cast<std::size_t>(i);
            const double mu = spec.mu(asset, xi);
            const double sigma = spec.sigma(asset, xi);
            table.drift(k, i) = (mu - 0.5 * sigma * sigma) * dt;
            table.vol(k, i) = sigma * sqrt_dt;
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// PathSet

PathSet::PathSet(TimeGrid grid, std::size_t n_paths, std::size_t n_assets, std::uint64_t seed, NoiseKind noise,
                 std::vector<double> data)
    : grid_(grid), n_paths_(n_paths), n_assets_(n_assets), seed_(seed), noise_(noise), data_(std::move(data)) {
    if (data_.size() != n_paths_ * grid_.nodes() * n_assets_) throw ValidationError("path set: data size mismatch");
}

Eigen::MatrixXd PathSet::path(std::size_t p) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(grid_.nodes()), static_cast<Eigen::Index>(n_assets_));
    for (std::size_t k = 0; k < grid_.nodes(); ++k) {
        for (std::size_t i = 0; i < n_assets_; ++i) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = at(p, k, i);
    }
    return m;
}

Eigen::MatrixXd PathSet::asset(std::size_t i) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n_paths_), static_cast<Eigen::Index>(grid_.nodes()));
    for (std::size_t p = 0; p < n_paths_; ++p) {
        for (std::size_t k = 0; k < grid_.nodes(); ++k) m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = at(p, k, i);
    }
    return m;
}

PricePanel PathSet::to_panel(std::size_t p) const {
    std::vector<std::string> ids(n_assets_);
    for (std::size_t i = 0; i < n_assets_; ++i) ids[i] = "asset-" + std::to_string(i);
    return PricePanel(grid_, path(p), std::move(ids));
}

PathSet simulate(const ProcessSpec& spec, const EnvironmentSeries& env, const TimeGrid& grid, std::size_t n_paths,
                 std::uint64_t seed, std::size_t threads) {
    if (n_paths < 1) throw ValidationError("simulate: need at least one path");
    const ProcessTable table = build_process_table(spec, env, grid);
    const std::size_t n = spec.n_assets();
    const std::size_t nodes = grid.nodes();
    const NoiseSource noise(seed, spec.noise());
    const double s0 = spec.initial_price();
    std::vector<double> data(n_paths * nodes * n);

    parallel_for(n_paths, resolve_threads(threads), [&](std::size_t p) {
        double* out = data.data() + p * nodes * n;
        std::vector<double> cum(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) out[i] = s0;
        for (std::size_t k = 0; k + 1 < nodes; ++k) {
            const auto row = static_cast<Eigen::Index>(k);
            for (std::size_t i = 0; i < n; ++i) {
                const auto col = static_cast<Eigen::Index>(i);
                const double vol = table.vol(row, col);
                const double z = vol != 0.0 ? noise.draw(p, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k)) : 0.0;
                cum[i] += table.drift(row, col) + vol * z;
                out[(k + 1) * n + i] = s0 * std::exp(cum[i]);
            }
        }
    });
    return PathSet(grid, n_paths, n, seed, spec.noise(), std::move(data));
}

PortfolioDynamics portfolio_dynamics(const PathSet& paths, const Eigen::VectorXd& weights,
                                     const std::optional<Eigen::VectorXd>& sigmas) {
    const std::size_t n = paths.n_assets();
    if (static_cast<std::size_t>(weights.size()) != n) {
        throw ValidationError("portfolio dynamics: " + std::to_string(weights.size()) + " weights for " +
                              std::to_string(n) + " assets");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-9) throw ValidationError("portfolio dynamics: weights must sum to one");
    const auto& grid = paths.grid();
    const auto n_paths = static_cast<Eigen::Index>(paths.n_paths());
    const auto steps = static_cast<Eigen::Index>(grid.steps());
    PortfolioDynamics out;
    out.values.resize(n_paths, steps + 1);
    out.returns.resize(n_paths, steps);
    for (Eigen::Index p = 0; p < n_paths; ++p) {
        out.values(p, 0) = 1.0;
        for (Eigen::Index k = 0; k < steps; ++k) {
            double gross = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto pp = static_cast<std::size_t>(p);
                const auto kk = static_cast<std::size_t>(k);
                gross += weights(static_cast<Eigen::Index>(i)) * paths.at(pp, kk + 1, i) / paths.at(pp, kk, i);
            }
            out.returns(p, k) = std::log(gross) / grid.dt();
            out.values(p, k + 1) = out.values(p, k) * gross;
        }
    }
    if (n_paths >= 2) out.sigma_hat = return_volatility(out.returns) * std::sqrt(grid.dt());
    if (sigmas) {
        if (sigmas->size() != weights.size()) throw ValidationError("portfolio dynamics: sigma length mismatch");
        out.sigma_hat_analytic = std::sqrt(weights.cwiseProduct(*sigmas).squaredNorm());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Numeraire

NumeraireSpec NumeraireSpec::deterministic(double phi_mu) {
    NumeraireSpec y;
    y.phi_mu = phi_mu;
    y.mode = NumeraireMode::deterministic;
    return y;
}

void NumeraireSpec::validate(std::size_t n_assets) const {
    if (!std::isfinite(phi_mu) || !std::isfinite(phi_sigma) || phi_sigma < 0.0) {
        throw ValidationError("numeraire: drift must be finite and volatility non-negative");
    }
    if (mode == NumeraireMode::deterministic && phi_sigma != 0.0) {
        throw ValidationError("numeraire: deterministic mode requires phi_sigma = 0");
    }
    if (rho.size() != 0 && static_cast<std::size_t>(rho.size()) != n_assets) {
        throw ValidationError("numeraire: need one correlation per asset");
    }
    for (Eigen::Index i = 0; i < rho.size(); ++i) {
        if (!(std::abs(rho(i)) <= 1.0)) {
            throw ValidationError("numeraire: |rho| > 1 for asset " + std::to_string(i));
        }
    }
    if (rho.size() != 0 && rho.squaredNorm() > 1.0 + 1e-12) {
        throw ValidationError("numeraire: sum of squared correlations exceeds one (asset noises are independent)");
    }
}

Eigen::MatrixXd simulate_numeraire(const PathSet& paths, const NumeraireSpec& y, std::uint64_t seed2) {
    y.validate(paths.n_assets());
    const auto& grid = paths.grid();
    const auto n_paths = static_cast<Eigen::Index>(paths.n_paths());
    const auto nodes = static_cast<Eigen::Index>(grid.nodes());
    Eigen::MatrixXd out(n_paths, nodes);
    if (y.mode == NumeraireMode::deterministic || y.phi_sigma == 0.0) {
        for (Eigen::Index k = 0; k < nodes; ++k) {
            out.col(k).setConstant(std::exp(y.phi_mu * (grid.at(static_cast<std::size_t>(k)) - grid.t0())));
        }
        return out;
    }
    const NoiseSource asset_noise(paths.seed(), paths.noise());
    const NoiseSource residual_noise(seed2, NoiseKind::normal);
    const double rho_sq = y.rho.size() ? y.rho.squaredNorm() : 0.0;
    const double residual_weight = std::sqrt(std::max(0.0, 1.0 - rho_sq));
    const double drift = (y.phi_mu - 0.5 * y.phi_sigma * y.phi_sigma) * grid.dt();
    const double vol = y.phi_sigma * std::sqrt(grid.dt());
    for (Eigen::Index p = 0; p < n_paths; ++p) {
        double log_y = 0.0;
        out(p, 0) = 1.0;
        for (Eigen::Index k = 0; k + 1 < nodes; ++k) {
            const auto step = static_cast<std::uint32_t>(k);
            double z = 0.0;
            for (Eigen::Index i = 0; i < y.rho.size(); ++i) {
                if (y.rho(i) != 0.0) {
                    z += y.rho(i) * asset_noise.draw(static_cast<std::uint64_t>(p), static_cast<std::uint32_t>(i), step);
                }
            }
            if (residual_weight > 0.0) {
                z += residual_weight * residual_noise.draw(static_cast<std::uint64_t>(p), 0, step, 1);
            }
            log_y += drift + vol * z;
            out(p, k + 1) = std::exp(log_y);
        }
    }
    return out;
}

PathSet apply_numeraire(const PathSet& paths, const NumeraireSpec& y, std::uint64_t seed2) {
    const Eigen::MatrixXd ys = simulate_numeraire(paths, y, seed2);
    std::vector<double> data = paths.data();
    const std::size_t nodes = paths.grid().nodes();
    const std::size_t n = paths.n_assets();
    for (std::size_t p = 0; p < paths.n_paths(); ++p) {
        for (std::size_t k = 0; k < nodes; ++k) {
            const double factor = ys(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
            for (std::size_t i = 0; i < n; ++i) data[(p * nodes + k) * n + i] *= factor;
        }
    }
    return PathSet(paths.grid(), paths.n_paths(), n, paths.seed(), paths.noise(), std::move(data));
}

CrossTermEstimate cross_term(const Eigen::MatrixXd& paths_y, const Eigen::MatrixXd& paths_pi, const TimeGrid& grid) {
    if (paths_y.rows() != paths_pi.rows() || paths_y.cols() != paths_pi.cols()) {
        throw ValidationError("cross term: Y and Pi samples must share path count and grid");
    }
    if (static_cast<std::size_t>(paths_y.cols()) != grid.nodes()) {
        throw ValidationError("cross term: sample length differs from the grid");
    }
    const Eigen::Index n = paths_y.rows();
    if (n < 2) throw ValidationError("cross term: need at least two jointly sampled paths");
    if ((paths_y.array() <= 0.0).any() || (paths_pi.array() <= 0.0).any()) {
        throw ValidationError("cross term: samples must be strictly positive");
    }
    const Eigen::Index steps = paths_y.cols() - 1;
    const Eigen::MatrixXd ly = paths_y.array().log().matrix();
    const Eigen::MatrixXd lp = paths_pi.array().log().matrix();
    const Eigen::MatrixXd dy = ly.rightCols(steps) - ly.leftCols(steps);
    const Eigen::MatrixXd dp = lp.rightCols(steps) - lp.leftCols(steps);
    const Eigen::RowVectorXd my = dy.colwise().mean();
    const Eigen::RowVectorXd mp = dp.colwise().mean();
    const double horizon = grid.dt() * static_cast<double>(steps);
    Eigen::VectorXd per_path(n);
    for (Eigen::Index p = 0; p < n; ++p) {
        per_path(p) = ((dy.row(p) - my).cwiseProduct(dp.row(p) - mp)).sum() / horizon;
    }
    const double correction = static_cast<double>(n) / static_cast<double>(n - 1);
    const double mean = per_path.mean();
    const double var = (per_path.array() - mean).square().sum() / static_cast<double>(n - 1);
    return {mean * correction, std::sqrt(var / static_cast<double>(n)) * correction};
}

double return_volatility(const Eigen::MatrixXd& samples) {
    if (samples.rows() < 2) throw ValidationError("return volatility: need at least two samples");
    if (samples.cols() < 1) throw ValidationError("return volatility: empty return streams");
    double total = 0.0;
    for (Eigen::Index k = 0; k < samples.cols(); ++k) {
        const auto col = samples.col(k);
        const double mean = col.mean();
        total += (col.array() - mean).square().mean();
    }
    return std::sqrt(total / static_cast<double>(samples.cols()));
}

double return_volatility(const std::vector<ReturnSeries>& samples) {
    if (samples.size() < 2) throw ValidationError("return volatility: need at least two samples");
    const std::size_t m = samples.front().values.size();
    Eigen::MatrixXd stacked(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(m));
    for (std::size_t s = 0; s < samples.size(); ++s) {
        if (samples[s].values.size() != m) throw ValidationError("return volatility: streams differ in length");
        for (std::size_t k = 0; k < m; ++k) stacked(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) = samples[s].values[k];
    }
    return return_volatility(stacked);
}

}  // namespace gaugekit
