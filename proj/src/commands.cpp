#include "gaugekit/commands.hpp"

#include <algorithm>
#include <cmath>

#include "gaugekit/discounting.hpp"
#include "gaugekit/error.hpp"
#include "gaugekit/option_pricer.hpp"
#include "gaugekit/panel_io.hpp"
#include "gaugekit/report.hpp"
#include "gaugekit/riskfree.hpp"
#include "gaugekit/stochastic_sim.hpp"

namespace gaugekit {

using nlohmann::json;

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

WeightVector configured_weights(const RiskfreeConfig& config, std::size_t n) {
    return config.weights == "random" ? WeightVector::random_positive(n, config.weight_seed) : WeightVector::equal(n);
}

PricePanel load_panel(const CommandRequest& request) {
    return ingest(*request.panel_path, IngestOptions{request.normalize});
}

json run_simulate(const CommandRequest& request) {
    const auto& cfg = request.config.simulate;
    const TimeGrid grid = make_grid(cfg);
    const EnvironmentSeries env = make_environment(cfg, grid);
    const ProcessSpec spec = make_process(cfg);
    const PathSet paths = simulate(spec, env, grid, cfg.n_paths, cfg.seed);

    const auto last = grid.steps();
    json assets = json::array();
    Eigen::VectorXd sigmas(static_cast<Eigen::Index>(cfg.n_assets));
    for (std::size_t i = 0; i < cfg.n_assets; ++i) {
        double mean = 0.0, log_mean = 0.0, log_sq = 0.0;
        for (std::size_t p = 0; p < paths.n_paths(); ++p) {
            const double s = paths.at(p, last, i);
            mean += s;
            log_mean += std::log(s);
            log_sq += std::log(s) * std::log(s);
        }
        const auto n = static_cast<double>(paths.n_paths());
        mean /= n;
        log_mean /= n;
        const double log_var = std::max(0.0, log_sq / n - log_mean * log_mean);
        sigmas(static_cast<Eigen::Index>(i)) = spec.sigma(i, env.at(0));
        assets.push_back({{"index", i},
                          {"terminal_mean", mean},
                          {"terminal_log_mean", log_mean},
                          {"terminal_log_sd", std::sqrt(log_var)}});
    }
    const Eigen::VectorXd w = WeightVector::equal(cfg.n_assets).w();
    const PortfolioDynamics dyn = portfolio_dynamics(paths, w, sigmas);
    if (request.panel_output) export_panel(paths.to_panel(0), *request.panel_output);
    return json{{"grid", to_json(grid)},
                {"n_paths", cfg.n_paths},
                {"n_assets", cfg.n_assets},
                {"noise", cfg.noise},
                {"assets", std::move(assets)},
                {"equal_weight_portfolio",
                 {{"sigma_hat", dyn.sigma_hat},
                  {"sigma_hat_analytic", dyn.sigma_hat_analytic.value_or(std::nan(""))},
                  {"terminal_mean", dyn.values.col(static_cast<Eigen::Index>(last)).mean()}}}};
}

json run_gauge(const CommandRequest& request) {
    const auto& rf = request.config.riskfree;
    const PricePanel panel = request.panel_path ? load_panel(request) : [&] {
        const auto& cfg = request.config.simulate;
        const TimeGrid grid = make_grid(cfg);
        return simulate(make_process(cfg), make_environment(cfg, grid), grid, 1, cfg.seed).to_panel(0);
    }();
    const WeightVector w = configured_weights(rf, panel.n_assets());
    const MarketGaugeResult gauge = extract_market_gauge(panel, w, RebalancePolicy{rf.rebalance});
    const BalanceResiduals balance = balance_residuals(panel, gauge);
    const PricePanel rf_units = to_riskfree_units(panel, gauge.portfolio_value);
    const MarketGaugeResult again = extract_market_gauge(rf_units, w, RebalancePolicy{rf.rebalance});
    double a_prime = 0.0;
    for (double v : again.a.a().values()) a_prime = std::max(a_prime, std::abs(v));

    json b_rows = json::array();
    for (std::size_t k = 0; k < panel.grid().steps(); ++k) {
        b_rows.push_back(to_vector(gauge.b_n.matrix(k).diagonal()));
    }
    return json{{"labels", panel.asset_ids()},
                {"grid", to_json(panel.grid())},
                {"weights", to_vector(w.w())},
                {"rebalance_every", rf.rebalance},
                {"a", to_json(gauge.a.a())},
                {"b_n_diagonal", std::move(b_rows)},
                {"b_n_max_abs", gauge.b_n.max_abs()},
                {"portfolio_value", to_json(gauge.portfolio_value)},
                {"balance", {{"price", balance.price_balance}, {"flow", balance.flow_balance}}},
                {"riskfree_units_max_abs_a", a_prime}};
}

json run_riskfree(const CommandRequest& request) {
    const auto& sim = request.config.simulate;
    const auto& rf = request.config.riskfree;
    const TimeGrid grid = make_grid(sim);
    const EnvironmentSeries env = make_environment(sim, grid);
    const ProcessSpec spec = make_process(sim);
    const StudyOptions options{sim.n_paths, sim.seed, 0};
    json out{{"grid", to_json(grid)}, {"n_paths", sim.n_paths}};
    if (rf.study == "convergence" || rf.study == "both") {
        if (!rf.sizes.empty() && rf.sizes.back() > sim.n_assets) {
            throw ValidationError("riskfree: largest study size exceeds simulate.n_assets");
        }
        const ScalingReport r = convergence_study(spec, env, grid, rf.sizes, options);
        out["convergence"] = {{"sizes", r.sizes},
                              {"sigma_hat_realized", r.sigma_hat_realized},
                              {"sigma_hat_analytic", r.sigma_hat_analytic},
                              {"slope", r.slope},
                              {"intercept", r.intercept},
                              {"analytic_slope", r.analytic_slope}};
    }
    if (rf.study == "etemadi" || rf.study == "both") {
        const WeightVector a = WeightVector::equal(sim.n_assets);
        const WeightVector b = WeightVector::random_positive(sim.n_assets, rf.weight_seed);
        const DivergenceReport r = etemadi_check(spec, env, grid, a, b, rf.cap, options, rf.min_size);
        out["etemadi"] = {{"sizes", r.sizes},
                          {"divergence", r.divergence},
                          {"terminal", r.terminal},
                          {"ratio_to_first", r.divergence.front() > 0.0 ? r.terminal / r.divergence.front() : 0.0}};
    }
    return out;
}

Payoff configured_payoff(const PdeConfig& cfg) {
    if (cfg.payoff == "call") return Payoff::call(cfg.strike);
    if (cfg.payoff == "put") return Payoff::put(cfg.strike);
    if (cfg.payoff == "digital_call") return Payoff::digital_call(cfg.strike);
    return Payoff::share();
}

json run_price(const CommandRequest& request) {
    const auto& cfg = request.config.pde;
    const PdeProblem base = PdeProblem::standard(configured_payoff(cfg), cfg.sigma, cfg.tau, cfg.s_intervals, cfg.t_steps);
    const PdeProblem problem = base.with_a(GaugeFieldA::constant(base.t_grid, cfg.a))
                                   .with_b(Series::constant(base.t_grid, Layout::intervals, cfg.b));
    const OptionSurface surface = solve_gauge_bs(problem);
    json out{{"payoff", cfg.payoff},
             {"strike", cfg.strike},
             {"spot", cfg.spot},
             {"sigma", cfg.sigma},
             {"tau", cfg.tau},
             {"a", cfg.a},
             {"b", cfg.b},
             {"grid", {{"s_intervals", cfg.s_intervals}, {"t_steps", cfg.t_steps}}},
             {"value", surface.value_at(cfg.spot)},
             {"delta", surface.delta_at(cfg.spot)},
             {"slice",
              {{"t", 0.0}, {"s", surface.s_grid}, {"values", to_vector(surface.values.row(0).transpose())}}}};
    if (cfg.payoff == "call" && cfg.b == 0.0) {
        // A = -r is the textbook rate-r equation.
        const double oracle = bs_closed_form_rate(cfg.spot, cfg.strike, cfg.sigma, cfg.tau, -cfg.a);
        out["closed_form"] = oracle;
        out["relative_error"] = std::abs(surface.value_at(cfg.spot) - oracle) / oracle;
    }
    if (cfg.sigma_hat > 0.0) {
        const EffectiveVol ev = effective_vol(cfg.sigma, cfg.sigma_hat);
        const OptionSurface primed = solve_primed_gauge(problem, cfg.sigma_hat);
        out["primed_gauge"] = {{"Sigma", ev.Sigma}, {"value", primed.value_at(cfg.spot)}};
    }
    return out;
}

json run_discount(const CommandRequest& request) {
    const auto& cfg = request.config.discount;
    const TimeGrid grid = TimeGrid::over(cfg.horizon, std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.horizon * 12))));
    json out{{"textbook", {{"rate", cfg.rate},
                           {"horizon", cfg.horizon},
                           {"factor", textbook_discount(Series::constant(grid, Layout::nodes, cfg.rate), cfg.horizon)}}}};
    if (!request.panel_path) return out;
    const PricePanel panel = load_panel(request);
    PipelineOptions options;
    options.rebalance.every = cfg.rebalance;
    options.window = cfg.window;
    const DiscountReport report = empirical_pipeline(panel, std::nullopt, options);
    const LabeledSeries fig = fig1_series(panel, std::nullopt, options);
    json rows = json::array();
    for (std::size_t i = 0; i < report.labels.size(); ++i) {
        rows.push_back({{"label", report.labels[i]},
                        {"final_value", report.final_values[i]},
                        {"discount_factor", report.discount_factors[i]}});
    }
    out["pipeline"] = {{"rows", std::move(rows)},
                       {"cash_label", report.cash_label},
                       {"cash_discount", report.cash_discount},
                       {"weights", to_vector(report.weights)},
                       {"rebalance_every", report.rebalance_every},
                       {"window", report.window},
                       {"riskfree_gauge", report.riskfree_gauge},
                       {"grid", to_json(report.grid)},
                       {"table", format_final_values(report)}};
    out["cash_in_riskfree_units"] = {{"label", fig.label}, {"dates", panel.dates()}, {"series", to_json(fig.values)}};
    return out;
}

json run_sensitivity(const CommandRequest& request) {
    const auto& sim = request.config.simulate;
    const auto& cfg = request.config.sensitivity;
    const TimeGrid grid = make_grid(sim);
    const EnvironmentSeries env = make_environment(sim, grid);
    const ProcessSpec spec = make_process(sim);
    const std::size_t n = sim.n_assets;
    const std::size_t factors = env.n_factors();
    // Central differences of mu in each factor at xi(t0); exact for affine functionals.
    Eigen::MatrixXd g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(factors));
    const auto xi0 = env.at(0);
    std::vector<double> up(xi0.begin(), xi0.end()), down(xi0.begin(), xi0.end());
    for (std::size_t f = 0; f < factors; ++f) {
        const double h = 1e-5 * std::max(1.0, std::abs(xi0[f]));
        up[f] = xi0[f] + h;
        down[f] = xi0[f] - h;
        for (std::size_t i = 0; i < n; ++i) {
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
                (spec.mu(i, up) - spec.mu(i, down)) / (2.0 * h);
        }
        up[f] = down[f] = xi0[f];
    }
    SensitivityProblem problem;
    problem.dmu_dxi = g;
    problem.cap = cfg.cap;
    problem.floor = cfg.floor;
    problem.tolerance = cfg.tolerance;
    problem.max_iterations = cfg.max_iterations;
    const SensitivityResult r = sensitivity_neutral_weights(problem);
    return json{{"n_assets", n},
                {"n_factors", factors},
                {"weights", to_vector(r.weights.w())},
                {"residual", r.residual},
                {"equal_weight_residual", r.equal_weight_residual},
                {"neutral", r.neutral},
                {"iterations", r.iterations}};
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"simulate", "gauge", "riskfree", "price", "discount", "sensitivity"};
    return names;
}

json execute(const CommandRequest& request) {
    const auto& c = request.command;
    if (c == "simulate") return run_simulate(request);
    if (c == "gauge") return run_gauge(request);
    if (c == "riskfree") return run_riskfree(request);
    if (c == "price") return run_price(request);
    if (c == "discount") return run_discount(request);
    if (c == "sensitivity") return run_sensitivity(request);
    throw ValidationError("unknown subcommand '" + c + "'");
}

CommandOutcome run(const CommandRequest& request) {
    try {
        json result = execute(request);
        return {exit_ok, make_report(request.command, std::move(result), request.config, request.canonical)};
    } catch (const ValidationError& e) {
        return {exit_usage, error_document("validation", e.what(), e.row(), e.column())};
    } catch (const ComputationError& e) {
        return {exit_computation, error_document("computation", e.what())};
    } catch (const std::exception& e) {
        return {exit_computation, error_document("internal", e.what())};
    }
}

}  // namespace gaugekit
