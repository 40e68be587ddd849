// gaugekit: command-line front end.
//
//   gaugekit price --config run.json --canonical
//   gaugekit discount --panel data/synthetic_12.csv
//
// Reports go to stdout (or --output) as JSON. Failures print a JSON error
// document on stderr and exit 1 (usage/validation) or 2 (computation).

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gaugekit/commands.hpp"
#include "gaugekit/error.hpp"
#include "gaugekit/report.hpp"

namespace {

int fail(int code, const nlohmann::json& error) {
    std::cerr << error.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gauge-invariant pricing, discounting and risk-free portfolio toolkit"};
    app.set_version_flag("--version", gaugekit::library_version());
    app.require_subcommand(1);

    std::string config_path;
    std::string panel_path;
    std::string output_path;
    std::string panel_output;
    bool canonical = false;
    bool normalize = false;

    const std::vector<std::pair<std::string, std::string>> descriptions{
        {"simulate", "Simulate price paths and summarise them"},
        {"gauge", "Extract the market gauge fields A and B_N from a panel"},
        {"riskfree", "Diversification studies of risk-free portfolios"},
        {"price", "Solve the gauge-field option pricing equation"},
        {"discount", "Textbook and gauge-invariant discounting of a panel"},
        {"sensitivity", "Weights insensitive to environment forecast errors"},
    };
    for (const auto& [name, text] : descriptions) {
        CLI::App* sub = app.add_subcommand(name, text);
        sub->add_option("-c,--config", config_path, "JSON run configuration (defaults apply when absent)");
        sub->add_option("-o,--output", output_path, "Write the report here instead of stdout");
        sub->add_flag("--canonical", canonical, "Omit the timestamp so reruns are byte-identical");
        if (name == "gauge" || name == "discount") {
            sub->add_option("-p,--panel", panel_path, "Price panel CSV");
            sub->add_flag("--normalize", normalize, "Scale every column to 1 at inception");
        }
        if (name == "simulate") sub->add_option("--panel-output", panel_output, "Write path 0 as a panel CSV");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(gaugekit::exit_usage, gaugekit::error_document("usage", e.what()));
    }

    gaugekit::CommandRequest request;
    request.command = app.get_subcommands().front()->get_name();
    request.canonical = canonical;
    request.normalize = normalize;
    if (!panel_path.empty()) request.panel_path = panel_path;
    if (!panel_output.empty()) request.panel_output = panel_output;
    try {
        if (!config_path.empty()) request.config = gaugekit::RunConfig::load(config_path);
    } catch (const gaugekit::ValidationError& e) {
        return fail(gaugekit::exit_usage, gaugekit::error_document("validation", e.what(), e.row(), e.column()));
    }

    const gaugekit::CommandOutcome outcome = gaugekit::run(request);
    if (outcome.exit_code != gaugekit::exit_ok) return fail(outcome.exit_code, outcome.document);

    const std::string text = outcome.document.dump(2) + "\n";
    if (output_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(output_path, std::ios::binary);
        if (!out) {
            return fail(gaugekit::exit_usage, gaugekit::error_document("usage", "cannot write " + output_path));
        }
        out << text;
    }
    return gaugekit::exit_ok;
}
