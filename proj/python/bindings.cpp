// Python bindings: gaugekit._core. Arrays cross as numpy arrays; reports
// cross as JSON text and are decoded in the package's __init__.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gaugekit/commands.hpp"
#include "gaugekit/discounting.hpp"
#include "gaugekit/error.hpp"
#include "gaugekit/gauge_core.hpp"
#include "gaugekit/option_pricer.hpp"
#include "gaugekit/panel_io.hpp"
#include "gaugekit/report.hpp"
#include "gaugekit/riskfree.hpp"
#include "gaugekit/stochastic_sim.hpp"

namespace py = pybind11;
using namespace gaugekit;

namespace {

Payoff payoff_from_name(const std::string& name, double strike) {
    if (name == "call") return Payoff::call(strike);
    if (name == "put") return Payoff::put(strike);
    if (name == "digital_call") return Payoff::digital_call(strike);
    if (name == "share") return Payoff::share();
    throw ValidationError("unknown payoff '" + name + "'");
}

py::dict surface_dict(const OptionSurface& s) {
    py::dict out;
    out["s_grid"] = s.s_grid;
    out["t"] = [&] {
        std::vector<double> t(s.t_grid.nodes());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = s.t_grid.at(k);
        return t;
    }();
    out["values"] = s.values;
    out["deltas"] = s.deltas;
    return out;
}

py::array_t<double> paths_array(const PathSet& paths) {
    py::array_t<double> out({paths.n_paths(), paths.grid().nodes(), paths.n_assets()});
    std::copy(paths.data().begin(), paths.data().end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gauge-invariant pricing, discounting and risk-free portfolio toolkit";
    m.attr("__version__") = library_version();

    static py::exception<Error> base_error(m, "GaugeError");
    static py::exception<ValidationError> validation_error(m, "ValidationError", base_error.ptr());
    static py::exception<ComputationError> computation_error(m, "ComputationError", base_error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            py::set_error(validation_error, e.what());
        } catch (const ComputationError& e) {
            py::set_error(computation_error, e.what());
        } catch (const Error& e) {
            py::set_error(base_error, e.what());
        }
    });

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<double, double, std::size_t>(), py::arg("t0"), py::arg("dt"), py::arg("steps"))
        .def_static("over", &TimeGrid::over, py::arg("horizon"), py::arg("steps"))
        .def_property_readonly("t0", &TimeGrid::t0)
        .def_property_readonly("dt", &TimeGrid::dt)
        .def_property_readonly("steps", &TimeGrid::steps)
        .def_property_readonly("nodes", &TimeGrid::nodes)
        .def_property_readonly("end", &TimeGrid::end)
        .def("__repr__", [](const TimeGrid& g) {
            return "TimeGrid(t0=" + format_double(g.t0()) + ", dt=" + format_double(g.dt()) +
                   ", steps=" + std::to_string(g.steps()) + ")";
        });

    py::class_<Series>(m, "Series")
        .def(py::init<TimeGrid, std::vector<double>>(), py::arg("grid"), py::arg("values"))
        .def_property_readonly("grid", &Series::grid)
        .def_property_readonly("values", [](const Series& s) {
            return std::vector<double>(s.values().begin(), s.values().end());
        })
        .def_property_readonly("is_nodes", [](const Series& s) { return s.layout() == Layout::nodes; })
        .def("integrate", &Series::integrate, py::arg("start"), py::arg("end"));

    // Discounting
    m.def("textbook_discount", &textbook_discount, py::arg("r"), py::arg("horizon"));
    m.def(
        "gauge_discount",
        [](const Series& mu, const Series& sigma, const Series& a, double horizon) {
            return gauge_discount(mu, sigma, GaugeFieldA(a), horizon);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("a"), py::arg("horizon"));
    m.def("forward_translate", &forward_translate, py::arg("n0"), py::arg("s"), py::arg("horizon"));

    // Option pricing
    m.def("bs_closed_form", &bs_closed_form, py::arg("s"), py::arg("e"), py::arg("sigma"), py::arg("tau"));
    m.def("bs_closed_form_rate", &bs_closed_form_rate, py::arg("s"), py::arg("e"), py::arg("sigma"), py::arg("tau"),
          py::arg("r"));
    m.def(
        "effective_vol",
        [](double sigma1, double sigma_hat) { return effective_vol(sigma1, sigma_hat).Sigma; },
        py::arg("sigma1"), py::arg("sigma_hat"));
    m.def(
        "solve_option",
        [](const std::string& payoff, double strike, double sigma, double tau, double a, double b, double sigma_hat,
           std::size_t s_intervals, std::size_t t_steps) {
            const PdeProblem base =
                PdeProblem::standard(payoff_from_name(payoff, strike), sigma, tau, s_intervals, t_steps);
            const PdeProblem problem = base.with_a(GaugeFieldA::constant(base.t_grid, a))
                                           .with_b(Series::constant(base.t_grid, Layout::intervals, b));
            return surface_dict(sigma_hat > 0.0 ? solve_primed_gauge(problem, sigma_hat) : solve_gauge_bs(problem));
        },
        py::arg("payoff") = "call", py::arg("strike") = 100.0, py::arg("sigma") = 0.2, py::arg("tau") = 1.0,
        py::arg("a") = 0.0, py::arg("b") = 0.0, py::arg("sigma_hat") = 0.0, py::arg("s_intervals") = 400,
        py::arg("t_steps") = 400,
        "Solve the pricing equation; with sigma_hat > 0 the A' = 0 gauge with the bumped volatility is used.");
    m.def(
        "merton_residual",
        [](double v, double dv_dt, double dv_ds, double dv_dh, double d2v_ds2, double d2v_dh2, double s, double h,
           double sigma1, double sigma_hat, double a, double b) {
            const MertonResult r =
                merton_residual(MertonPoint{v, dv_dt, dv_ds, dv_dh, d2v_ds2, d2v_dh2, s, h, sigma1, sigma_hat, a, b});
            return py::make_tuple(r.residual, r.hedge_ratio);
        },
        py::arg("v"), py::arg("dv_dt"), py::arg("dv_ds"), py::arg("dv_dh"), py::arg("d2v_ds2"), py::arg("d2v_dh2"),
        py::arg("s"), py::arg("h"), py::arg("sigma1"), py::arg("sigma_hat"), py::arg("a") = 0.0, py::arg("b") = 0.0,
        "Returns (residual, hedge_ratio).");

    // Simulation
    m.def(
        "simulate",
        [](std::vector<double> mu, std::vector<double> sigma, double horizon, std::size_t steps, std::size_t n_paths,
           std::uint64_t seed, const std::string& noise) {
            const TimeGrid grid = TimeGrid::over(horizon, steps);
            const ProcessSpec spec = ProcessSpec::from_vectors(std::move(mu), std::move(sigma), parse_noise_kind(noise));
            return paths_array(gaugekit::simulate(spec, EnvironmentSeries::constant(grid, 1), grid, n_paths, seed));
        },
        py::arg("mu"), py::arg("sigma"), py::arg("horizon"), py::arg("steps"), py::arg("n_paths"), py::arg("seed") = 1,
        py::arg("noise") = "normal", "Price paths as an array [paths, nodes, assets] starting at 1.");

    // Risk-free portfolios
    m.def(
        "extract_market_gauge",
        [](const Eigen::MatrixXd& prices, double dt, std::optional<Eigen::VectorXd> weights, std::size_t rebalance) {
            const TimeGrid grid(0.0, dt, static_cast<std::size_t>(prices.rows()) - 1);
            std::vector<std::string> ids;
            for (Eigen::Index i = 0; i < prices.cols(); ++i) ids.push_back("asset-" + std::to_string(i));
            const PricePanel panel(grid, prices, ids);
            const WeightVector w = weights ? WeightVector(*weights) : WeightVector::equal(panel.n_assets());
            const MarketGaugeResult g = extract_market_gauge(panel, w, RebalancePolicy{rebalance});
            const BalanceResiduals bal = balance_residuals(panel, g);
            py::dict out;
            out["a"] = std::vector<double>(g.a.a().values().begin(), g.a.a().values().end());
            out["portfolio_value"] =
                std::vector<double>(g.portfolio_value.values().begin(), g.portfolio_value.values().end());
            out["quantities"] = g.quantities;
            out["price_balance"] = bal.price_balance;
            out["flow_balance"] = bal.flow_balance;
            return out;
        },
        py::arg("prices"), py::arg("dt"), py::arg("weights") = py::none(), py::arg("rebalance") = 1);
    m.def(
        "convergence_study",
        [](std::vector<double> mu, std::vector<double> sigma, std::vector<std::size_t> sizes, double horizon,
           std::size_t steps, std::size_t n_paths, std::uint64_t seed) {
            const TimeGrid grid = TimeGrid::over(horizon, steps);
            const ProcessSpec spec = ProcessSpec::from_vectors(std::move(mu), std::move(sigma));
            const ScalingReport r =
                convergence_study(spec, EnvironmentSeries::constant(grid, 1), grid, sizes, StudyOptions{n_paths, seed, 0});
            py::dict out;
            out["sizes"] = r.sizes;
            out["sigma_hat_realized"] = r.sigma_hat_realized;
            out["sigma_hat_analytic"] = r.sigma_hat_analytic;
            out["slope"] = r.slope;
            out["analytic_slope"] = r.analytic_slope;
            return out;
        },
        py::arg("mu"), py::arg("sigma"), py::arg("sizes"), py::arg("horizon"), py::arg("steps"),
        py::arg("n_paths") = 10000, py::arg("seed") = 1);
    m.def(
        "sensitivity_neutral_weights",
        [](const Eigen::MatrixXd& dmu_dxi, double cap, double floor, double tolerance) {
            SensitivityProblem problem;
            problem.dmu_dxi = dmu_dxi;
            problem.cap = cap;
            problem.floor = floor;
            problem.tolerance = tolerance;
            const SensitivityResult r = sensitivity_neutral_weights(problem);
            py::dict out;
            out["weights"] = r.weights.w();
            out["residual"] = r.residual;
            out["equal_weight_residual"] = r.equal_weight_residual;
            out["neutral"] = r.neutral;
            return out;
        },
        py::arg("dmu_dxi"), py::arg("cap") = 2.0, py::arg("floor") = 0.01, py::arg("tolerance") = 1e-8);

    // Files and commands
    m.def(
        "ingest",
        [](const std::string& path, bool normalize) {
            const PricePanel panel = ingest(path, IngestOptions{normalize});
            py::dict out;
            out["labels"] = panel.asset_ids();
            out["dates"] = panel.dates();
            out["prices"] = panel.prices();
            out["dt"] = panel.grid().dt();
            out["cash_column"] = panel.cash_column();
            return out;
        },
        py::arg("path"), py::arg("normalize") = false);
    m.def(
        "_run_json",
        [](const std::string& command, const std::string& config_json, std::optional<std::string> panel,
           bool canonical, bool normalize) -> py::tuple {
            CommandRequest request;
            request.command = command;
            request.canonical = canonical;
            request.normalize = normalize;
            request.panel_path = std::move(panel);
            try {
                request.config = RunConfig::from_json(nlohmann::json::parse(config_json));
            } catch (const ValidationError& e) {
                return py::make_tuple(static_cast<int>(exit_usage),
                                      error_document("validation", e.what(), e.row(), e.column()).dump());
            } catch (const nlohmann::json::exception& e) {
                return py::make_tuple(static_cast<int>(exit_usage), error_document("validation", e.what()).dump());
            }
            CommandOutcome outcome;
            {
                py::gil_scoped_release release;
                outcome = run(request);
            }
            return py::make_tuple(outcome.exit_code, outcome.document.dump());
        },
        py::arg("command"), py::arg("config_json"), py::arg("panel") = py::none(), py::arg("canonical") = true,
        py::arg("normalize") = false);
}
