#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gaugekit/error.hpp"
#include "gaugekit/option_pricer.hpp"
#include "gaugekit/tridiagonal.hpp"
#include "oracles.hpp"

using namespace gaugekit;

namespace {

double call_pde(double sigma, double a = 0.0, std::size_t n = 400) {
    const PdeProblem base = PdeProblem::standard(Payoff::call(100.0), sigma, 1.0, n, n);
    return solve_gauge_bs(base.with_a(GaugeFieldA::constant(base.t_grid, a))).value_at(100.0);
}

}  // namespace

TEST(ClosedForm, MatchesQuadratureOracle) {
    for (double s : {60.0, 95.0, 100.0, 130.0}) {
        for (double sigma : {0.1, 0.2, 0.45}) {
            EXPECT_NEAR(bs_closed_form(s, 100.0, sigma, 1.0), oracle::call_price(s, 100.0, sigma, 1.0, 0.0), 1e-8);
            EXPECT_NEAR(bs_closed_form_rate(s, 100.0, sigma, 0.7, 0.05), oracle::call_price(s, 100.0, sigma, 0.7, 0.05),
                        1e-8);
        }
    }
}

TEST(ClosedForm, Limits) {
    EXPECT_NEAR(bs_closed_form(1000.0, 100.0, 0.2, 1.0), 900.0, 1e-9);
    EXPECT_LT(bs_closed_form(10.0, 100.0, 0.2, 1.0), 1e-12);
    EXPECT_EQ(bs_closed_form(120.0, 100.0, 0.2, 0.0), 20.0);
    EXPECT_NEAR(bs_closed_form(100.0, 100.0, 0.2, 1.0), 7.965567, 1e-6);
}

TEST(GaugeBs, AtTheMoneyCall) {
    const double v = call_pde(0.2);
    EXPECT_NEAR(v, 7.97, 0.01);
    EXPECT_NEAR(v, bs_closed_form(100.0, 100.0, 0.2, 1.0), 1e-3 * v);
}

TEST(GaugeBs, SecondOrderInTheGrid) {
    const double exact = bs_closed_form(100.0, 100.0, 0.2, 1.0);
    const double coarse = std::abs(call_pde(0.2, 0.0, 200) - exact);
    const double fine = std::abs(call_pde(0.2, 0.0, 400) - exact);
    EXPECT_NEAR(coarse / fine, 4.0, 0.5);
}

TEST(GaugeBs, NegativeRateGaugeIsTextbookRate) {
    for (double r : {0.02, 0.05}) {
        const double v = call_pde(0.2, -r);
        EXPECT_NEAR(v, bs_closed_form_rate(100.0, 100.0, 0.2, 1.0, r), 1e-3 * v) << r;
    }
}

TEST(GaugeBs, ShareIsReproducedExactly) {
    const OptionSurface surface = solve_gauge_bs(PdeProblem::standard(Payoff::share(), 0.3, 1.0, 100, 50));
    for (std::size_t j = 0; j < surface.s_grid.size(); ++j) {
        EXPECT_NEAR(surface.values(0, static_cast<Eigen::Index>(j)), surface.s_grid[j], 1e-10 * surface.s_grid[j]);
    }
}

TEST(GaugeBs, PutCallParity) {
    const OptionSurface call = solve_gauge_bs(PdeProblem::standard(Payoff::call(100.0), 0.2, 1.0));
    const OptionSurface put = solve_gauge_bs(PdeProblem::standard(Payoff::put(100.0), 0.2, 1.0));
    for (double s : {80.0, 100.0, 125.0}) {
        EXPECT_NEAR(call.value_at(s) - put.value_at(s), s - 100.0, 1e-6) << s;
    }
    EXPECT_NEAR(put.value_at(100.0), bs_put_closed_form(100.0, 100.0, 0.2, 1.0), 1e-2);
}

TEST(GaugeBs, CovariantUnderPriceGauge) {
    // W(s, t) = e^{phi(t)} V(e^{-phi(t)} s, t) solves the problem with A - phi-dot
    // and payoff e^{phi(T)} g(e^{-phi(T)} s); for a call that is a call struck at E e^{phi(T)}.
    const double strike = 100.0, sigma = 0.25;
    const PdeProblem base = PdeProblem::standard(Payoff::call(strike), sigma, 1.0);
    const TimeGrid& g = base.t_grid;
    std::vector<double> phi(g.nodes()), a_moved(g.steps());
    for (std::size_t k = 0; k < g.nodes(); ++k) phi[k] = 0.1 + 0.05 * std::sin(3.0 * g.at(k));
    for (std::size_t k = 0; k < g.steps(); ++k) a_moved[k] = -(phi[k + 1] - phi[k]) / g.dt();
    const double phi_t = phi.back();
    const PdeProblem moved =
        base.with_a(GaugeFieldA(Series(g, a_moved)));
    PdeProblem moved_payoff = moved;
    moved_payoff.payoff = Payoff::custom([=](double s) { return std::max(s - strike * std::exp(phi_t), 0.0); }, true);
    const OptionSurface v = solve_gauge_bs(base);
    const OptionSurface w = solve_gauge_bs(moved_payoff);
    for (double s : {90.0, 110.0, 130.0}) {
        const double expected = std::exp(phi[0]) * v.value_at(std::exp(-phi[0]) * s);
        EXPECT_NEAR(w.value_at(s), expected, 5e-3) << s;
        // Against the exact answer too, so the comparison is not two equal errors.
        EXPECT_NEAR(w.value_at(s), std::exp(phi[0]) * bs_closed_form(std::exp(-phi[0]) * s, strike, sigma, 1.0), 5e-3);
    }
}

TEST(GaugeBs, TradeUnitFieldDiscountsLikeARate) {
    // B constant adds e^{B tau} growth to a share held in the option's unit.
    const PdeProblem base = PdeProblem::standard(Payoff::share(), 0.2, 1.0, 100, 200);
    const OptionSurface surface = solve_gauge_bs(base.with_b(Series::constant(base.t_grid, Layout::intervals, 0.03)));
    EXPECT_NEAR(surface.value_at(1.0), std::exp(0.03), 1e-5);
}

TEST(EffectiveVol, CombinesInQuadrature) {
    const EffectiveVol ev = effective_vol(0.2, 0.02);
    EXPECT_NEAR(ev.Sigma, 0.200998, 1e-6);
    EXPECT_THROW(effective_vol(-0.1, 0.0), ValidationError);
}

TEST(PrimedGauge, PricesAtEffectiveVolatility) {
    const PdeProblem base = PdeProblem::standard(Payoff::call(100.0), 0.2, 1.0);
    double previous = 0.0;
    for (double sh : {0.0, 0.02, 0.05, 0.1}) {
        const double v = solve_primed_gauge(base.with_a(GaugeFieldA::constant(base.t_grid, -0.03)), sh).value_at(100.0);
        const double exact = bs_closed_form(100.0, 100.0, effective_vol(0.2, sh).Sigma, 1.0);
        EXPECT_NEAR(v, exact, 1e-3 * exact) << sh;
        EXPECT_GT(v, previous);
        previous = v;
    }
}

TEST(MertonResidual, HomogeneousSolutionIsExact) {
    // V(s, H) = H c(s / H, t) with c the zero-rate call at the combined volatility.
    const double e = 1.0, tau = 0.8, s1 = 0.2, sh = 0.15, h = 1.3;
    const double big = std::hypot(s1, sh);
    for (double s : {0.9, 1.3, 1.7}) {
        const double x = s / h;
        const double d1 = (std::log(x / e) + 0.5 * big * big * tau) / (big * std::sqrt(tau));
        const double c = bs_closed_form(x, e, big, tau);
        const double cx = 0.5 * std::erfc(-d1 / std::sqrt(2.0));
        const double cxx = oracle::normal_pdf(d1) / (x * big * std::sqrt(tau));
        MertonPoint p;
        p.s = s;
        p.h = h;
        p.sigma1 = s1;
        p.sigma_hat = sh;
        p.a = 0.04;
        p.b = -0.01;
        p.v = h * c;
        p.dv_dt = -0.5 * big * big * x * x * cxx * h;
        p.dv_ds = cx;
        p.dv_dh = c - x * cx;
        p.d2v_ds2 = cxx / h;
        p.d2v_dh2 = x * x * cxx / h;
        const MertonResult r = merton_residual(p);
        EXPECT_NEAR(r.residual, 0.0, 1e-12) << s;
        EXPECT_EQ(r.hedge_ratio, -p.dv_dh);
    }
}

TEST(MertonResidual, FiniteDifferencesConvergeAtSecondOrder) {
    const double e = 1.0, tau = 0.8, s1 = 0.2, sh = 0.15, h0 = 1.0, s0 = 1.1;
    const double big = std::hypot(s1, sh);
    auto v = [&](double s, double h, double t) { return h * bs_closed_form(s / h, e, big, tau - t); };
    auto residual = [&](double d) {
        MertonPoint p;
        p.s = s0;
        p.h = h0;
        p.sigma1 = s1;
        p.sigma_hat = sh;
        p.a = 0.05;
        p.v = v(s0, h0, 0.0);
        p.dv_dt = (v(s0, h0, d) - v(s0, h0, -d)) / (2 * d);
        p.dv_ds = (v(s0 + d, h0, 0) - v(s0 - d, h0, 0)) / (2 * d);
        p.dv_dh = (v(s0, h0 + d, 0) - v(s0, h0 - d, 0)) / (2 * d);
        p.d2v_ds2 = (v(s0 + d, h0, 0) - 2 * p.v + v(s0 - d, h0, 0)) / (d * d);
        p.d2v_dh2 = (v(s0, h0 + d, 0) - 2 * p.v + v(s0, h0 - d, 0)) / (d * d);
        return std::abs(merton_residual(p).residual);
    };
    const double r1 = residual(2e-2);
    const double r2 = residual(1e-2);
    EXPECT_LT(r2, r1);
    EXPECT_NEAR(r1 / r2, 4.0, 0.5);
}

TEST(GaugeBs, RejectsIllPosedProblems) {
    EXPECT_THROW(solve_gauge_bs(PdeProblem::standard(Payoff::digital_call(100.0), 0.0, 1.0, 40, 10)),
                 ValidationError);
    EXPECT_THROW(solve_gauge_bs(PdeProblem::standard(Payoff::call(100.0), 0.2, 1.0, 2, 10)), ValidationError);
    EXPECT_THROW(default_price_grid(100.0, 401), ValidationError);
    EXPECT_THROW(Payoff::call(-1.0), ValidationError);
    // Zero volatility with a continuous payoff is fine: the value is intrinsic.
    const double v = solve_gauge_bs(PdeProblem::standard(Payoff::call(100.0), 0.0, 1.0, 40, 10)).value_at(150.0);
    EXPECT_NEAR(v, 50.0, 1e-9);
}

TEST(Tridiagonal, MatchesDenseSolve) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 30;
    std::vector<double> lo(n), di(n), up(n), rhs(n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        lo[i] = u(rng);
        up[i] = u(rng);
        di[i] = 3.0 + u(rng);
        rhs[i] = b(i) = u(rng);
        m(i, i) = di[i];
        if (i > 0) m(i, i - 1) = lo[i];
        if (i + 1 < n) m(i, i + 1) = up[i];
    }
    const Eigen::VectorXd dense = m.partialPivLu().solve(b);
    const auto x = solve_tridiagonal(lo, di, up, rhs);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], dense(i), 1e-13);
    EXPECT_THROW(solve_tridiagonal({0, 1}, {0, 1}, {1, 0}, {1, 1}), ComputationError);
}
