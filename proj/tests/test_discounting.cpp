#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "gaugekit/discounting.hpp"
#include "gaugekit/error.hpp"
#include "gaugekit/panel_io.hpp"
#include "oracles.hpp"

using namespace gaugekit;

namespace {

std::vector<double> phi_dot(const GaugeScalar& phi) {
    const TimeGrid& g = phi.phi().grid();
    std::vector<double> d(g.steps());
    for (std::size_t k = 0; k < g.steps(); ++k) d[k] = (phi.phi()[k + 1] - phi.phi()[k]) / g.dt();
    return d;
}

Series interval_series(const TimeGrid& g, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(g.steps());
    for (double& x : v) x = u(rng);
    return Series(g, std::move(v));
}

std::filesystem::path fixture() { return std::filesystem::path(GAUGEKIT_DATA_DIR) / "synthetic_12.csv"; }

}  // namespace

TEST(TextbookDiscount, ConstantRates) {
    const TimeGrid g = TimeGrid::over(10.0, 120);
    EXPECT_NEAR(textbook_discount(Series::constant(g, Layout::nodes, 0.0406), 10.0), 0.666, 1e-3);
    EXPECT_NEAR(textbook_discount(Series::constant(g, Layout::nodes, 0.1), 10.0), std::exp(-1.0), 1e-14);
    EXPECT_EQ(textbook_discount(Series::constant(g, Layout::nodes, 0.0), 10.0), 1.0);
    EXPECT_THROW(textbook_discount(Series::constant(g, Layout::nodes, 0.1), 11.0), ValidationError);
}

TEST(GaugeDiscount, InvariantUnderSimultaneousShift) {
    std::mt19937_64 rng(12);
    const TimeGrid g = TimeGrid::over(5.0, 250);
    for (int trial = 0; trial < 100; ++trial) {
        const Series mu = interval_series(g, rng, -0.05, 0.15);
        const Series sigma = interval_series(g, rng, 0.0, 0.4);
        const Series a = interval_series(g, rng, -0.08, 0.02);
        const auto d = phi_dot(oracle::random_phi(g, rng));
        std::vector<double> mu2(g.steps()), a2(g.steps());
        for (std::size_t k = 0; k < g.steps(); ++k) {
            mu2[k] = mu[k] + d[k];
            a2[k] = a[k] - d[k];
        }
        const double before = gauge_discount(mu, sigma, GaugeFieldA(a), 5.0);
        const double after = gauge_discount(Series(g, mu2), sigma, GaugeFieldA(Series(g, a2)), 5.0);
        EXPECT_NEAR(after, before, 1e-12 * std::max(1.0, before));
    }
}

TEST(TextbookDiscount, TransformsByGaugeEndpoints) {
    std::mt19937_64 rng(13);
    const TimeGrid g = TimeGrid::over(3.0, 90);
    for (int trial = 0; trial < 20; ++trial) {
        const Series r = interval_series(g, rng, 0.0, 0.06);
        const GaugeScalar phi = oracle::random_phi(g, rng);
        const auto d = phi_dot(phi);
        // r plays the role of -A, so it shifts by +phi-dot.
        std::vector<double> r2(g.steps());
        for (std::size_t k = 0; k < g.steps(); ++k) r2[k] = r[k] + d[k];
        const double factor = std::exp(phi.phi()[0] - phi.phi()[g.steps()]);
        EXPECT_NEAR(textbook_discount(Series(g, r2), 3.0), factor * textbook_discount(r, 3.0), 1e-12);
    }
}

TEST(GaugeDiscount, ReducesToTextbookForStaticCash) {
    std::mt19937_64 rng(14);
    const TimeGrid g = TimeGrid::over(2.0, 40);
    const Series r = interval_series(g, rng, 0.0, 0.08);
    std::vector<double> minus_r(g.steps());
    for (std::size_t k = 0; k < g.steps(); ++k) minus_r[k] = -r[k];
    const Series zero = Series::constant(g, Layout::intervals, 0.0);
    EXPECT_EQ(gauge_discount(zero, zero, GaugeFieldA(Series(g, minus_r)), 2.0), textbook_discount(r, 2.0));
    EXPECT_EQ(gauge_discount(zero, zero, GaugeFieldA::zero(g), 2.0), 1.0);
}

TEST(GaugeDiscount, MatchesMonteCarloMean) {
    const TimeGrid g = TimeGrid::over(2.0, 20);
    const double mu = 0.06, sigma = 0.25, a = -0.03;
    const std::size_t n = 100000;
    const PathSet paths = simulate(ProcessSpec::constant(1, mu, sigma), EnvironmentSeries::constant(g, 1), g, n, 31);
    double sum = 0.0, sq = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const double x = paths.at(p, g.steps(), 0);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / static_cast<double>(n);
    const double se = std::sqrt((sq / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
    // exp(int mu) is the log-normal mean growth; the factor strips sigma^2/2 and adds A.
    const double adjust = std::exp(a * 2.0 - 0.5 * sigma * sigma * 2.0);
    const double factor = gauge_discount(Series::constant(g, Layout::intervals, mu),
                                         Series::constant(g, Layout::intervals, sigma), GaugeFieldA::constant(g, a), 2.0);
    EXPECT_NEAR(factor, mean * adjust, 3.0 * se * adjust);
}

TEST(ForwardTranslate, ExchangeRateIdentities) {
    const TimeGrid g = TimeGrid::over(1.0, 2);
    EXPECT_EQ(forward_translate(3.0, Series(g, {2.0, 5.0, 2.0}), 1.0), 3.0);
    EXPECT_EQ(forward_translate(3.0, Series(g, {2.0, 3.0, 4.0}), 1.0), 1.5);
    const Series s(g, {1.3, 0.7, 0.9});
    const Series reversed(g, {0.9, 0.7, 1.3});
    const double n0 = 0.8123;
    EXPECT_NEAR(forward_translate(forward_translate(n0, s, 1.0), reversed, 1.0), n0, 1e-15);
}

TEST(DiscountSpec, DispatchesAndValidates) {
    const TimeGrid g = TimeGrid::over(10.0, 10);
    DiscountSpec spec;
    spec.horizon = 10.0;
    EXPECT_THROW(discount(spec), ValidationError);
    spec.r = Series::constant(g, Layout::intervals, 0.1);
    EXPECT_NEAR(discount(spec), std::exp(-1.0), 1e-14);
    spec.mode = DiscountMode::gauge_invariant;
    EXPECT_THROW(discount(spec), ValidationError);
}

TEST(RollingEstimates, RecoverConstantGrowth) {
    const TimeGrid g = TimeGrid::over(1.0, 100);
    std::vector<double> p(g.nodes());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::exp(0.04 * g.at(k));
    const auto [mu, sigma] = rolling_drift_vol(Series(g, p), 10);
    for (std::size_t k = 0; k < g.steps(); ++k) {
        EXPECT_NEAR(mu[k], 0.04, 1e-10);
        EXPECT_NEAR(sigma[k], 0.0, 1e-6);
    }
    EXPECT_THROW(rolling_drift_vol(Series(g, p), 0), ValidationError);
}

TEST(Pipeline, IdenticalAssetsAreAllRiskFree) {
    const TimeGrid g = TimeGrid::over(1.0, 50);
    Eigen::MatrixXd prices(51, 3);
    for (Eigen::Index k = 0; k < 51; ++k) prices.row(k).setConstant(std::exp(0.03 * g.at(static_cast<std::size_t>(k))));
    const PricePanel panel = PricePanel(g, prices, {"a", "b", "cash"}).with_cash_column(2);
    const DiscountReport report = empirical_pipeline(panel);
    ASSERT_EQ(report.labels.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(report.final_values[i], 1.0, 1e-14) << i;
        EXPECT_NEAR(report.discount_factors[i], 1.0, 1e-12) << i;
    }
    EXPECT_EQ(report.final_values.back(), 1.0);
    const LabeledSeries series = fig1_series(panel);
    for (double v : series.values.values()) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(Pipeline, RequiresCashAndNormalisation) {
    const TimeGrid g = TimeGrid::over(1.0, 2);
    Eigen::MatrixXd prices = Eigen::MatrixXd::Ones(3, 2);
    EXPECT_THROW(empirical_pipeline(PricePanel(g, prices, {"a", "b"})), ValidationError);
    prices(0, 0) = 2.0;
    try {
        empirical_pipeline(PricePanel(g, prices, {"a", "b"}).with_cash_column(1));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("normalis"), std::string::npos);
        EXPECT_EQ(e.column(), 1u);
    }
}

TEST(Pipeline, FixtureBaseline) {
    const PricePanel panel = ingest(fixture());
    const DiscountReport report = empirical_pipeline(panel);
    ASSERT_EQ(report.labels.size(), 13u);
    EXPECT_EQ(report.cash_label, "US Dollar");
    EXPECT_EQ(report.labels.back(), "Risk-free portfolio");
    EXPECT_EQ(report.final_values.back(), 1.0);
    for (std::size_t i = 0; i < report.labels.size(); ++i) {
        EXPECT_GT(report.final_values[i], 0.0);
        EXPECT_GT(report.discount_factors[i], 0.0);
    }
    // Frozen from the pipeline when the fixture was generated.
    const std::vector<double> baseline{0.5983368820451181, 3.576845808130961,  0.3487641916525221,  1.112188525517351,
                                      0.9136533216260997, 0.8887107072895704, 0.8151537258562043,  0.7910497315764402,
                                      2.1484689450495447, 0.35192823022348785, 0.6113539282618716, 0.6382454505476416};
    ASSERT_EQ(baseline.size(), 12u);
    for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(report.final_values[i], baseline[i], 1e-9) << report.labels[i];
    EXPECT_NEAR(report.cash_discount, 0.6382454505476415, 1e-9);

    const LabeledSeries series = fig1_series(panel);
    EXPECT_EQ(series.values[0], 1.0);
    EXPECT_NEAR(series.values[series.values.size() - 1], report.final_values[11], 1e-15);
    EXPECT_LT(series.values[series.values.size() - 1], 1.0);
    // Cash has no drift or volatility of its own, so its factor is e^{int A}, its final value.
    EXPECT_NEAR(report.cash_discount, report.final_values[11], 1e-12);
}
