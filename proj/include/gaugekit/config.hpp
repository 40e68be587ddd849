#pragma once

// Run configuration: one JSON document with a section per subcommand. Every
// field has a default, unknown keys are rejected, and numeric ranges are
// checked at load time.
//
// Parameter functionals mu(xi), sigma(xi) come from a small named catalog:
//   constant     {"value": v}                      v for every asset
//   spread       {"low": a, "high": b}             linear in the asset index from a to b
//   sector_block {"values": [...], "block_size": m}  asset i gets values[(i / m) % len]
//   affine       {"base": c, "loadings": [...], "dispersion": d}
//                c + (1 + d (i/(N-1) - 1/2)) sum_f loadings[f] xi_f

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaugekit/stochastic_sim.hpp"

namespace gaugekit {

struct CatalogEntry {
    std::string name = "constant";
    nlohmann::json params = nlohmann::json::object();
};

/// Builds the named functional, checking its parameters. Throws ValidationError
/// for unknown names or malformed parameters.
ParameterFn make_parameter_fn(const CatalogEntry& entry, std::size_t n_assets, std::size_t n_factors);

struct EnvironmentConfig {
    std::vector<double> values{0.0};  ///< xi_f(t0), one per factor
    std::vector<double> trends;       ///< d xi_f / dt, empty = static
};

struct SimulateConfig {
    std::size_t n_assets = 16;
    std::size_t n_paths = 1000;
    std::uint64_t seed = 1;
    double horizon = 1.0;
    double dt = 1.0 / 252.0;
    std::string noise = "normal";
    CatalogEntry mu{"constant", {{"value", 0.05}}};
    CatalogEntry sigma{"constant", {{"value", 0.2}}};
    EnvironmentConfig environment;
};

struct RiskfreeConfig {
    std::string weights = "equal";  ///< "equal" or "random" (uniform(0.5, 1.5), normalised)
    std::uint64_t weight_seed = 7;
    double cap = 2.0;
    std::size_t rebalance = 1;      ///< grid steps between rebalances, 0 = buy and hold
    std::string study = "convergence";  ///< "convergence", "etemadi" or "both"
    std::vector<std::size_t> sizes{16, 64, 256, 1024};
    std::size_t min_size = 64;
};

struct PdeConfig {
    std::size_t s_intervals = 400;
    std::size_t t_steps = 400;
    double strike = 100.0;
    double spot = 100.0;
    double sigma = 0.2;
    double tau = 1.0;
    std::string payoff = "call";    ///< call, put, digital_call, share
    double a = 0.0;
    double b = 0.0;
    double sigma_hat = 0.0;
};

struct DiscountConfig {
    std::size_t window = 63;
    std::size_t rebalance = 1;
    double rate = 0.0406;
    double horizon = 10.0;
};

struct SensitivityConfig {
    double cap = 2.0;
    double floor = 0.01;
    double tolerance = 1e-8;
    std::size_t max_iterations = 200000;
};

struct RunConfig {
    SimulateConfig simulate;
    RiskfreeConfig riskfree;
    PdeConfig pde;
    DiscountConfig discount;
    SensitivityConfig sensitivity;

    /// Parses and validates; missing keys keep their defaults.
    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig load(const std::string& path);
    nlohmann::json to_json() const;
    /// FNV-1a 64-bit hash of the canonical (sorted, compact) JSON form, as 16 hex digits.
    std::string hash() const;
};

/// The process described by a simulate section.
ProcessSpec make_process(const SimulateConfig& config);
EnvironmentSeries make_environment(const SimulateConfig& config, const TimeGrid& grid);
TimeGrid make_grid(const SimulateConfig& config);

std::string fnv1a_hex(const std::string& text);

}  // namespace gaugekit
