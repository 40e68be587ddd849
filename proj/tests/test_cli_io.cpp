#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "gaugekit/commands.hpp"
#include "gaugekit/config.hpp"
#include "gaugekit/error.hpp"
#include "gaugekit/panel_io.hpp"
#include "gaugekit/report.hpp"

using namespace gaugekit;
using nlohmann::json;

namespace {

const char* small_panel =
    "date,S&P 500,Gold,US Dollar #cash\n"
    "2005-06-30,1,1,1\n"
    "2005-07-01,1.0021,0.998,0.9995\n"
    "2005-07-05,1.004,1.01,0.999\n";

template <class F>
ValidationError expect_validation(F&& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e;
    }
    ADD_FAILURE() << "expected a validation error";
    return ValidationError("none");
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("gaugekit_test_" + name);
    std::ofstream(path, std::ios::binary) << content;
    return path;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run_cli(const std::string& args) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto out = dir / "gaugekit_cli_out.txt";
    const auto err = dir / "gaugekit_cli_err.txt";
    const std::string cmd = std::string(GAUGEKIT_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST(PanelIo, ParsesLabelsDatesAndCash) {
    const PricePanel panel = parse_panel(small_panel);
    EXPECT_EQ(panel.n_assets(), 3u);
    EXPECT_EQ(panel.asset_ids()[2], "US Dollar");
    EXPECT_EQ(panel.cash_column(), std::optional<std::size_t>(2));
    EXPECT_EQ(panel.dates().front(), "2005-06-30");
    // 5 days over 2 steps.
    EXPECT_NEAR(panel.grid().dt(), 2.5 / days_per_year, 1e-15);
    EXPECT_EQ(panel.prices()(1, 0), 1.0021);
}

TEST(PanelIo, RoundTripIsExact) {
    const PricePanel panel = parse_panel(small_panel);
    const PricePanel again = parse_panel(format_panel(panel));
    EXPECT_EQ(again.prices(), panel.prices());
    EXPECT_EQ(again.asset_ids(), panel.asset_ids());
    EXPECT_EQ(again.cash_column(), panel.cash_column());
    EXPECT_EQ(format_panel(again), format_panel(panel));
    EXPECT_EQ(format_panel(panel), small_panel);
    EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(PanelIo, ZeroPriceReportsCoordinates) {
    std::string text = "date,a,b\n";
    for (int d = 1; d <= 9; ++d) {
        text += "2010-01-0" + std::to_string(d) + (d == 7 ? ",1,0\n" : ",1,1\n");
    }
    const ValidationError e = expect_validation([&] { parse_panel(text); });
    EXPECT_EQ(e.row(), std::optional<std::size_t>(7));
    EXPECT_EQ(e.column(), std::optional<std::size_t>(2));
}

TEST(PanelIo, RejectsMalformedFiles) {
    EXPECT_EQ(expect_validation([] { parse_panel("date,a\n2010-01-01,1\n2010-01-02,1,2\n"); }).row(),
              std::optional<std::size_t>(2));
    EXPECT_EQ(expect_validation([] { parse_panel("date,a\n2010-01-02,1\n2010-01-01,1\n"); }).row(),
              std::optional<std::size_t>(2));
    const ValidationError bad_date = expect_validation([] { parse_panel("date,a\n2005-06-30,1\n2005-06-31,1\n"); });
    EXPECT_EQ(bad_date.row(), std::optional<std::size_t>(2));
    EXPECT_EQ(bad_date.column(), std::optional<std::size_t>(0));
    EXPECT_NE(std::string(bad_date.what()).find("2005-06-31"), std::string::npos);
    expect_validation([] { parse_panel("date,a\r\n2010-01-01,1\r\n2010-01-02,1\r\n"); });
    expect_validation([] { parse_panel("date,a #cash,b #cash\n2010-01-01,1,1\n2010-01-02,1,1\n"); });
    expect_validation([] { parse_panel("date,a,a\n2010-01-01,1,1\n2010-01-02,1,1\n"); });
    expect_validation([] { parse_panel("date,a\n2010-01-01,abc\n2010-01-02,1\n"); });
    expect_validation([] { parse_panel("date,a\n2010-01-01,1\n"); });
    // A trailing newline is part of the format, a blank line in the middle is not.
    EXPECT_NO_THROW(parse_panel("date,a\n2010-01-01,1\n2010-01-02,1\n"));
    expect_validation([] { parse_panel("date,a\n2010-01-01,1\n\n2010-01-02,1\n"); });
}

TEST(PanelIo, NormalizesOnRequest) {
    const PricePanel panel = parse_panel("date,a,b\n2010-01-01,2,4\n2010-01-02,3,2\n", IngestOptions{true});
    EXPECT_EQ(panel.prices()(0, 0), 1.0);
    EXPECT_EQ(panel.prices()(1, 0), 1.5);
    EXPECT_EQ(panel.prices()(1, 1), 0.5);
}

TEST(PanelIo, FixtureLoads) {
    const PricePanel panel = ingest(std::filesystem::path(GAUGEKIT_DATA_DIR) / "synthetic_12.csv");
    EXPECT_EQ(panel.n_assets(), 12u);
    EXPECT_EQ(panel.asset_ids()[*panel.cash_column()], "US Dollar");
    EXPECT_EQ(panel.prices().row(0), Eigen::RowVectorXd::Ones(12));
    EXPECT_NEAR(panel.grid().end(), 10.0, 0.01);
}

TEST(Config, DefaultsUnknownKeysAndRanges) {
    const RunConfig defaults = RunConfig::from_json(json::object());
    EXPECT_EQ(defaults.pde.s_intervals, 400u);
    EXPECT_EQ(defaults.discount.window, 63u);
    expect_validation([] { RunConfig::from_json(json::parse(R"({"pde": {"strik": 100}})")); });
    expect_validation([] { RunConfig::from_json(json::parse(R"({"pricing": {}})")); });
    expect_validation([] { RunConfig::from_json(json::parse(R"({"pde": {"sigma": -0.1}})")); });
    expect_validation([] { RunConfig::from_json(json::parse(R"({"simulate": {"n_paths": 0}})")); });
    expect_validation([] { RunConfig::from_json(json::parse(R"({"pde": {"payoff": "barrier"}})")); });
    expect_validation([] { RunConfig::from_json(json::parse(R"({"pde": {"tau": "one"}})")); });
    const RunConfig c = RunConfig::from_json(json::parse(R"({"pde": {"strike": 90}})"));
    EXPECT_EQ(c.pde.strike, 90.0);
    EXPECT_EQ(RunConfig::from_json(c.to_json()).to_json(), c.to_json());
}

TEST(Config, CatalogFunctionals) {
    const std::vector<double> xi{0.5, -1.0};
    const auto spread = make_parameter_fn({"spread", {{"low", 0.1}, {"high", 0.4}}}, 4, 2);
    EXPECT_NEAR(spread(0, xi), 0.1, 1e-15);
    EXPECT_NEAR(spread(3, xi), 0.4, 1e-15);
    const auto block = make_parameter_fn({"sector_block", {{"values", {1.0, 2.0}}, {"block_size", 2}}}, 6, 2);
    EXPECT_EQ(block(1, xi), 1.0);
    EXPECT_EQ(block(2, xi), 2.0);
    EXPECT_EQ(block(4, xi), 1.0);
    const auto affine =
        make_parameter_fn({"affine", {{"base", 0.05}, {"loadings", {0.02, 0.01}}, {"dispersion", 0.0}}}, 3, 2);
    EXPECT_NEAR(affine(1, xi), 0.05 + 0.01 - 0.01, 1e-15);
    expect_validation([] { make_parameter_fn({"cubic", json::object()}, 2, 1); });
    expect_validation([] { make_parameter_fn({"constant", {{"value", 1.0}, {"extra", 2}}}, 2, 1); });
    expect_validation([] { make_parameter_fn({"affine", {{"base", 0.0}, {"loadings", {1.0}}}}, 2, 3); });
}

TEST(Config, HashIsStableAndSensitive) {
    const RunConfig a = RunConfig::from_json(json::object());
    const RunConfig b = RunConfig::from_json(json::parse(R"({"pde": {"strike": 100}})"));
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
    EXPECT_NE(a.hash(), RunConfig::from_json(json::parse(R"({"pde": {"strike": 101}})")).hash());
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Commands, PriceReportIsCanonical) {
    CommandRequest request{"price", RunConfig::from_json(json::object()), std::nullopt, false, true, std::nullopt};
    const CommandOutcome first = run(request);
    const CommandOutcome second = run(request);
    ASSERT_EQ(first.exit_code, exit_ok) << first.document.dump();
    validate_report(first.document);
    EXPECT_EQ(first.document.dump(), second.document.dump());
    EXPECT_FALSE(first.document["provenance"].contains("timestamp"));
    EXPECT_NEAR(first.document["result"]["value"].get<double>(), 7.97, 0.01);
    EXPECT_EQ(first.document["provenance"]["config_hash"], request.config.hash());
}

TEST(Commands, GaugeOnFixture) {
    CommandRequest request{"gauge", RunConfig::from_json(json::object()),
                           (std::filesystem::path(GAUGEKIT_DATA_DIR) / "synthetic_12.csv").string(), false, true,
                           std::nullopt};
    const CommandOutcome out = run(request);
    ASSERT_EQ(out.exit_code, exit_ok) << out.document.dump();
    const json& r = out.document["result"];
    EXPECT_LE(r["balance"]["price"].get<double>(), 1e-12);
    EXPECT_LE(r["balance"]["flow"].get<double>(), 1e-12);
    EXPECT_LE(r["riskfree_units_max_abs_a"].get<double>(), 1e-12);
}

TEST(Commands, SimulateIsDeterministic) {
    const json cfg = json::parse(R"({"simulate": {"n_assets": 4, "n_paths": 200, "horizon": 0.5, "dt": 0.05}})");
    CommandRequest request{"simulate", RunConfig::from_json(cfg), std::nullopt, false, true, std::nullopt};
    const CommandOutcome a = run(request);
    ASSERT_EQ(a.exit_code, exit_ok) << a.document.dump();
    EXPECT_EQ(a.document.dump(), run(request).document.dump());
    request.config.simulate.seed = 2;
    EXPECT_NE(a.document["result"].dump(), run(request).document["result"].dump());
}

TEST(Commands, ErrorsMapToExitCodes) {
    CommandRequest missing{"discount", RunConfig::from_json(json::object()), "/nonexistent/panel.csv", false, true,
                           std::nullopt};
    const CommandOutcome out = run(missing);
    EXPECT_EQ(out.exit_code, exit_usage);
    EXPECT_TRUE(out.document.contains("error"));

    CommandRequest unknown{"frobnicate", RunConfig::from_json(json::object()), std::nullopt, false, true, std::nullopt};
    EXPECT_EQ(run(unknown).exit_code, exit_usage);

    // A volatility-free universe has no volatility to fit a scaling law to.
    const json cfg = json::parse(R"({"simulate": {"n_assets": 8, "n_paths": 10, "horizon": 0.1, "dt": 0.05,
                                     "sigma": {"name": "constant", "params": {"value": 0.0}}},
                                     "riskfree": {"sizes": [1, 2, 4, 8]}})");
    CommandRequest degenerate{"riskfree", RunConfig::from_json(cfg), std::nullopt, false, true, std::nullopt};
    const CommandOutcome bad = run(degenerate);
    EXPECT_EQ(bad.exit_code, exit_computation) << bad.document.dump();
}

TEST(Cli, ExitCodesAndOutput) {
    const CliRun ok = run_cli("price --canonical");
    EXPECT_EQ(ok.code, 0) << ok.err;
    const json report = json::parse(ok.out);
    EXPECT_EQ(report["command"], "price");

    const auto cfg = temp_file("bad.json", R"({"pde": {"volatility": 0.2}})");
    const CliRun bad_config = run_cli("price --config " + cfg.string());
    EXPECT_EQ(bad_config.code, 1);
    EXPECT_TRUE(json::parse(bad_config.err).contains("error"));

    const auto panel = temp_file("zero.csv", "date,a\n2010-01-01,1\n2010-01-02,0\n");
    const CliRun bad_panel = run_cli("gauge --panel " + panel.string());
    EXPECT_EQ(bad_panel.code, 1);
    const json err = json::parse(bad_panel.err)["error"];
    EXPECT_EQ(err["row"], 2);
    EXPECT_EQ(err["column"], 1);

    EXPECT_EQ(run_cli("").code, 1);
    EXPECT_EQ(run_cli("price --no-such-flag").code, 1);

    const auto degenerate = temp_file(
        "degenerate.json",
        R"({"simulate": {"n_assets": 8, "n_paths": 10, "horizon": 0.1, "dt": 0.05, "sigma": {"name": "constant", "params": {"value": 0.0}}}, "riskfree": {"sizes": [1, 2, 4, 8]}})");
    EXPECT_EQ(run_cli("riskfree --config " + degenerate.string()).code, 2);

    const auto out_path = std::filesystem::temp_directory_path() / "gaugekit_test_report.json";
    EXPECT_EQ(run_cli("discount --canonical --panel " + std::string(GAUGEKIT_DATA_DIR) + "/synthetic_12.csv -o " +
                      out_path.string())
                  .code,
              0);
    const json discount = json::parse(slurp(out_path));
    EXPECT_EQ(discount["result"]["pipeline"]["rows"].size(), 13u);
}
