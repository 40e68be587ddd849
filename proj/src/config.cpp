#include "gaugekit/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "gaugekit/error.hpp"

namespace gaugekit {

using nlohmann::json;

namespace {

// Reads known keys from one object and rejects the rest.
class Section {
public:
    Section(const json& doc, std::string name) : name_(std::move(name)) {
        if (doc.is_null()) return;
        if (!doc.is_object()) throw ValidationError("config: section '" + name_ + "' must be an object");
        doc_ = &doc;
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!doc_ || !doc_->contains(key)) return;
        try {
            out = (*doc_)[key].get<T>();
        } catch (const json::exception&) {
            throw ValidationError("config: " + name_ + "." + key + " has the wrong type");
        }
    }

    void read(const char* key, CatalogEntry& out) {
        seen_.insert(key);
        if (!doc_ || !doc_->contains(key)) return;
        const json& entry = (*doc_)[key];
        if (entry.is_string()) {
            out = CatalogEntry{entry.get<std::string>(), json::object()};
        } else if (entry.is_object() && entry.contains("name") && entry["name"].is_string()) {
            out.name = entry["name"].get<std::string>();
            out.params = entry.value("params", json::object());
            for (const auto& [k, v] : entry.items()) {
                if (k != "name" && k != "params") throw ValidationError("config: unknown key " + name_ + "." + key + "." + k);
            }
        } else {
            throw ValidationError("config: " + name_ + "." + key + " must be a catalog name or {name, params}");
        }
    }

    const json* sub(const char* key) {
        seen_.insert(key);
        if (!doc_ || !doc_->contains(key)) return nullptr;
        return &(*doc_)[key];
    }

    void finish() const {
        if (!doc_) return;
        for (const auto& [k, v] : doc_->items()) {
            if (!seen_.count(k)) throw ValidationError("config: unknown key " + name_ + "." + k);
        }
    }

private:
    const json* doc_ = nullptr;
    std::string name_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError("config: " + what);
}

double param(const CatalogEntry& entry, const char* key, std::optional<double> fallback = std::nullopt) {
    if (!entry.params.contains(key)) {
        if (fallback) return *fallback;
        throw ValidationError("config: catalog entry '" + entry.name + "' needs parameter '" + key + "'");
    }
    const auto& v = entry.params[key];
    if (!v.is_number()) throw ValidationError("config: parameter '" + std::string(key) + "' must be a number");
    return v.get<double>();
}

std::vector<double> param_list(const CatalogEntry& entry, const char* key) {
    if (!entry.params.contains(key) || !entry.params[key].is_array()) {
        throw ValidationError("config: catalog entry '" + entry.name + "' needs list parameter '" + key + "'");
    }
    std::vector<double> out;
    for (const auto& v : entry.params[key]) {
        if (!v.is_number()) throw ValidationError("config: parameter '" + std::string(key) + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

void check_params(const CatalogEntry& entry, std::initializer_list<const char*> allowed) {
    if (!entry.params.is_object()) throw ValidationError("config: catalog params must be an object");
    for (const auto& [k, v] : entry.params.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ValidationError("config: catalog entry '" + entry.name + "' has unknown parameter '" + k + "'");
    }
}

}  // namespace

ParameterFn make_parameter_fn(const CatalogEntry& entry, std::size_t n_assets, std::size_t n_factors) {
    if (entry.name == "constant") {
        check_params(entry, {"value"});
        const double value = param(entry, "value");
        return [value](std::size_t, std::span<const double>) { return value; };
    }
    if (entry.name == "spread") {
        check_params(entry, {"low", "high"});
        const double low = param(entry, "low");
        const double high = param(entry, "high");
        const double denom = n_assets > 1 ? static_cast<double>(n_assets - 1) : 1.0;
        return [low, high, denom](std::size_t i, std::span<const double>) {
            return low + (high - low) * static_cast<double>(i) / denom;
        };
    }
    if (entry.name == "sector_block") {
        check_params(entry, {"values", "block_size"});
        const auto values = param_list(entry, "values");
        const double block = param(entry, "block_size");
        require(!values.empty(), "sector_block needs at least one value");
        require(block >= 1.0 && block == std::floor(block), "sector_block block_size must be a positive integer");
        const auto size = static_cast<std::size_t>(block);
        return [values, size](std::size_t i, std::span<const double>) { return values[(i / size) % values.size()]; };
    }
    if (entry.name == "affine") {
        check_params(entry, {"base", "loadings", "dispersion"});
        const double base = param(entry, "base");
        const auto loadings = param_list(entry, "loadings");
        const double dispersion = param(entry, "dispersion", 0.0);
        require(loadings.size() == n_factors, "affine needs one loading per environment factor");
        const double denom = n_assets > 1 ? static_cast<double>(n_assets - 1) : 1.0;
        return [base, loadings, dispersion, denom](std::size_t i, std::span<const double> xi) {
            double exposure = 0.0;
            for (std::size_t f = 0; f < loadings.size(); ++f) exposure += loadings[f] * xi[f];
            return base + (1.0 + dispersion * (static_cast<double>(i) / denom - 0.5)) * exposure;
        };
    }
    throw ValidationError("config: unknown catalog name '" + entry.name + "'");
}

RunConfig RunConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("config: document must be a JSON object");
    RunConfig c;
    Section top(doc, "config");

    if (const json* s = top.sub("simulate")) {
        Section sec(*s, "simulate");
        auto& v = c.simulate;
        sec.read("n_assets", v.n_assets);
        sec.read("n_paths", v.n_paths);
        sec.read("seed", v.seed);
        sec.read("horizon", v.horizon);
        sec.read("dt", v.dt);
        sec.read("noise", v.noise);
        sec.read("mu", v.mu);
        sec.read("sigma", v.sigma);
        if (const json* e = sec.sub("environment")) {
            Section env(*e, "simulate.environment");
            env.read("values", v.environment.values);
            env.read("trends", v.environment.trends);
            env.finish();
        }
        sec.finish();
    }
    if (const json* s = top.sub("riskfree")) {
        Section sec(*s, "riskfree");
        auto& v = c.riskfree;
        sec.read("weights", v.weights);
        sec.read("weight_seed", v.weight_seed);
        sec.read("cap", v.cap);
        sec.read("rebalance", v.rebalance);
        sec.read("study", v.study);
        sec.read("sizes", v.sizes);
        sec.read("min_size", v.min_size);
        sec.finish();
    }
    if (const json* s = top.sub("pde")) {
        Section sec(*s, "pde");
        auto& v = c.pde;
        sec.read("s_intervals", v.s_intervals);
        sec.read("t_steps", v.t_steps);
        sec.read("strike", v.strike);
        sec.read("spot", v.spot);
        sec.read("sigma", v.sigma);
        sec.read("tau", v.tau);
        sec.read("payoff", v.payoff);
        sec.read("a", v.a);
        sec.read("b", v.b);
        sec.read("sigma_hat", v.sigma_hat);
        sec.finish();
    }
    if (const json* s = top.sub("discount")) {
        Section sec(*s, "discount");
        auto& v = c.discount;
        sec.read("window", v.window);
        sec.read("rebalance", v.rebalance);
        sec.read("rate", v.rate);
        sec.read("horizon", v.horizon);
        sec.finish();
    }
    if (const json* s = top.sub("sensitivity")) {
        Section sec(*s, "sensitivity");
        auto& v = c.sensitivity;
        sec.read("cap", v.cap);
        sec.read("floor", v.floor);
        sec.read("tolerance", v.tolerance);
        sec.read("max_iterations", v.max_iterations);
        sec.finish();
    }
    top.finish();

    // Range checks.
    const auto& sim = c.simulate;
    require(sim.n_assets >= 1, "simulate.n_assets must be at least 1");
    require(sim.n_paths >= 1, "simulate.n_paths must be at least 1");
    require(sim.horizon > 0.0 && std::isfinite(sim.horizon), "simulate.horizon must be positive");
    require(sim.dt > 0.0 && sim.dt <= sim.horizon, "simulate.dt must be in (0, horizon]");
    parse_noise_kind(sim.noise);
    require(!sim.environment.values.empty(), "simulate.environment.values needs at least one factor");
    require(sim.environment.trends.empty() || sim.environment.trends.size() == sim.environment.values.size(),
            "simulate.environment.trends must match values in length");
    make_parameter_fn(sim.mu, sim.n_assets, sim.environment.values.size());
    make_parameter_fn(sim.sigma, sim.n_assets, sim.environment.values.size());

    const auto& rf = c.riskfree;
    require(rf.weights == "equal" || rf.weights == "random", "riskfree.weights must be 'equal' or 'random'");
    require(rf.cap >= 1.0, "riskfree.cap must be at least 1");
    require(rf.study == "convergence" || rf.study == "etemadi" || rf.study == "both",
            "riskfree.study must be 'convergence', 'etemadi' or 'both'");
    require(rf.min_size >= 1, "riskfree.min_size must be at least 1");

    const auto& pde = c.pde;
    require(pde.s_intervals >= 4 && pde.s_intervals % 2 == 0, "pde.s_intervals must be even and at least 4");
    require(pde.t_steps >= 1, "pde.t_steps must be at least 1");
    require(pde.strike > 0.0 && pde.spot > 0.0, "pde.strike and pde.spot must be positive");
    require(pde.sigma >= 0.0 && pde.sigma_hat >= 0.0, "pde volatilities must be non-negative");
    require(pde.tau > 0.0, "pde.tau must be positive");
    require(pde.payoff == "call" || pde.payoff == "put" || pde.payoff == "digital_call" || pde.payoff == "share",
            "pde.payoff must be call, put, digital_call or share");

    require(c.discount.window >= 1, "discount.window must be at least 1");
    require(c.discount.horizon > 0.0, "discount.horizon must be positive");

    const auto& sen = c.sensitivity;
    require(sen.floor >= 0.0 && sen.floor <= 1.0, "sensitivity.floor must be in [0, 1]");
    require(sen.cap >= 1.0, "sensitivity.cap must be at least 1");
    require(sen.tolerance > 0.0, "sensitivity.tolerance must be positive");
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
    return from_json(doc);
}

json RunConfig::to_json() const {
    auto entry = [](const CatalogEntry& e) { return json{{"name", e.name}, {"params", e.params}}; };
    const auto& s = simulate;
    const auto& r = riskfree;
    return json{
        {"simulate",
         {{"n_assets", s.n_assets},
          {"n_paths", s.n_paths},
          {"seed", s.seed},
          {"horizon", s.horizon},
          {"dt", s.dt},
          {"noise", s.noise},
          {"mu", entry(s.mu)},
          {"sigma", entry(s.sigma)},
          {"environment", {{"values", s.environment.values}, {"trends", s.environment.trends}}}}},
        {"riskfree",
         {{"weights", r.weights},
          {"weight_seed", r.weight_seed},
          {"cap", r.cap},
          {"rebalance", r.rebalance},
          {"study", r.study},
          {"sizes", r.sizes},
          {"min_size", r.min_size}}},
        {"pde",
         {{"s_intervals", pde.s_intervals},
          {"t_steps", pde.t_steps},
          {"strike", pde.strike},
          {"spot", pde.spot},
          {"sigma", pde.sigma},
          {"tau", pde.tau},
          {"payoff", pde.payoff},
          {"a", pde.a},
          {"b", pde.b},
          {"sigma_hat", pde.sigma_hat}}},
        {"discount",
         {{"window", discount.window},
          {"rebalance", discount.rebalance},
          {"rate", discount.rate},
          {"horizon", discount.horizon}}},
        {"sensitivity",
         {{"cap", sensitivity.cap},
          {"floor", sensitivity.floor},
          {"tolerance", sensitivity.tolerance},
          {"max_iterations", sensitivity.max_iterations}}},
    };
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunConfig::hash() const { return fnv1a_hex(to_json().dump()); }

TimeGrid make_grid(const SimulateConfig& config) {
    const auto steps = static_cast<std::size_t>(std::max(1L, std::lround(config.horizon / config.dt)));
    return TimeGrid::over(config.horizon, steps);
}

EnvironmentSeries make_environment(const SimulateConfig& config, const TimeGrid& grid) {
    const auto& env = config.environment;
    EnvironmentSeries out{grid, EnvironmentSeries::Matrix(static_cast<Eigen::Index>(grid.nodes()),
                                                          static_cast<Eigen::Index>(env.values.size()))};
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        for (std::size_t f = 0; f < env.values.size(); ++f) {
            const double trend = env.trends.empty() ? 0.0 : env.trends[f];
            out.xi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)) =
                env.values[f] + trend * (grid.at(k) - grid.t0());
        }
    }
    return out;
}

ProcessSpec make_process(const SimulateConfig& config) {
    const std::size_t factors = config.environment.values.size();
    return ProcessSpec(config.n_assets, make_parameter_fn(config.mu, config.n_assets, factors),
                       make_parameter_fn(config.sigma, config.n_assets, factors), parse_noise_kind(config.noise));
}

}  // namespace gaugekit
