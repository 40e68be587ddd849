#include "gaugekit/option_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaugekit/error.hpp"
#include "gaugekit/tridiagonal.hpp"

namespace gaugekit {

// ---------------------------------------------------------------------------
// Payoffs

Payoff Payoff::call(double strike) {
    if (!(strike > 0.0)) throw ValidationError("payoff: strike must be positive");
    return Payoff(PayoffKind::call, strike, nullptr, true);
}

Payoff Payoff::put(double strike) {
    if (!(strike > 0.0)) throw ValidationError("payoff: strike must be positive");
    return Payoff(PayoffKind::put, strike, nullptr, true);
}

Payoff Payoff::digital_call(double strike) {
    if (!(strike > 0.0)) throw ValidationError("payoff: strike must be positive");
    return Payoff(PayoffKind::digital_call, strike, nullptr, false);
}

Payoff Payoff::share() { return Payoff(PayoffKind::share, 0.0, nullptr, true); }

Payoff Payoff::custom(std::function<double(double)> fn, bool continuous) {
    if (!fn) throw ValidationError("payoff: empty custom payoff");
    return Payoff(PayoffKind::custom, 0.0, std::move(fn), continuous);
}

double Payoff::operator()(double s) const {
    switch (kind_) {
        case PayoffKind::call: return std::max(s - strike_, 0.0);
        case PayoffKind::put: return std::max(strike_ - s, 0.0);
        case PayoffKind::digital_call: return s > strike_ ? 1.0 : 0.0;
        case PayoffKind::share: return s;
        case PayoffKind::custom: return fn_(s);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Grids and problems

std::vector<double> log_spaced_grid(double lo, double hi, std::size_t intervals) {
    if (!(lo > 0.0) || !(hi > lo)) throw ValidationError("price grid: need 0 < lo < hi");
    if (intervals < 1) throw ValidationError("price grid: need at least one interval");
    std::vector<double> s(intervals + 1);
    const double step = std::log(hi / lo) / static_cast<double>(intervals);
    for (std::size_t j = 0; j <= intervals; ++j) s[j] = lo * std::exp(step * static_cast<double>(j));
    s.back() = hi;
    return s;
}

std::vector<double> default_price_grid(double strike, std::size_t intervals) {
    if (intervals % 2 != 0) throw ValidationError("price grid: interval count must be even to centre the strike");
    auto s = log_spaced_grid(strike / 8.0, strike * 8.0, intervals);
    s[intervals / 2] = strike;
    return s;
}

PdeProblem PdeProblem::standard(Payoff payoff, double sigma, double tau, std::size_t s_intervals,
                                std::size_t t_steps) {
    if (!(tau > 0.0)) throw ValidationError("pde: time to expiry must be positive");
    if (t_steps < 1) throw ValidationError("pde: need at least one time step");
    const TimeGrid grid = TimeGrid::over(tau, t_steps);
    const double centre = payoff.strike() > 0.0 ? payoff.strike() : 1.0;
    return PdeProblem{default_price_grid(centre, s_intervals),
                      grid,
                      Series::constant(grid, Layout::intervals, sigma),
                      GaugeFieldA::zero(grid),
                      Series::constant(grid, Layout::intervals, 0.0),
                      std::move(payoff)};
}

PdeProblem PdeProblem::with_a(GaugeFieldA field) const {
    PdeProblem out = *this;
    out.a = std::move(field);
    return out;
}

PdeProblem PdeProblem::with_b(Series rate) const {
    PdeProblem out = *this;
    out.b = std::move(rate);
    return out;
}

PdeProblem PdeProblem::with_sigma(Series vol) const {
    PdeProblem out = *this;
    out.sigma = std::move(vol);
    return out;
}

void PdeProblem::validate() const {
    if (s_grid.size() < 5) {
        throw ValidationError("pde: price grid too coarse (" + std::to_string(s_grid.size() < 2 ? 0 : s_grid.size() - 2) +
                              " interior nodes, need at least 3)");
    }
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
        if (!(s_grid[j] > 0.0) || !std::isfinite(s_grid[j]) || (j > 0 && !(s_grid[j] > s_grid[j - 1]))) {
            throw ValidationError("pde: price grid must be positive and strictly increasing");
        }
    }
    if (!(sigma.grid() == t_grid) || !(a.grid() == t_grid) || !(b.grid() == t_grid)) {
        throw ValidationError("pde: sigma, A and B must live on the problem's time grid");
    }
    bool all_zero = true;
    for (double v : sigma.values()) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("pde: volatility must be finite and non-negative");
        all_zero = all_zero && v == 0.0;
    }
    for (double v : a.a().values()) {
        if (!std::isfinite(v)) throw ValidationError("pde: non-finite A");
    }
    for (double v : b.values()) {
        if (!std::isfinite(v)) throw ValidationError("pde: non-finite B");
    }
    if (all_zero && !payoff.continuous()) {
        throw ValidationError("pde: degenerate problem, zero volatility with a discontinuous payoff");
    }
    for (double s : s_grid) {
        if (!std::isfinite(payoff(s))) throw ValidationError("pde: payoff is not finite on the price grid");
    }
}

// ---------------------------------------------------------------------------
// Solver

namespace {

struct Stencil {
    double lower, centre, upper;
};

// Three-point derivative weights on a non-uniform grid; exact for quadratics.
Stencil first_derivative(double hm, double hp) {
    return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}

Stencil second_derivative(double hm, double hp) {
    return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}

struct Operator {
    std::vector<double> lower, diag, upper;
    bool dirichlet_lower = false;
};

Operator build_operator(const std::vector<double>& s, double sigma, double a, double b, bool absorbing) {
    const std::size_t m = s.size();
    Operator op{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), absorbing};
    const double half_var = 0.5 * sigma * sigma;
    for (std::size_t j = 1; j + 1 < m; ++j) {
        const double hm = s[j] - s[j - 1];
        const double hp = s[j + 1] - s[j];
        const Stencil d1 = first_derivative(hm, hp);
        const Stencil d2 = second_derivative(hm, hp);
        const double diffusion = half_var * s[j] * s[j];
        const double drift = -a * s[j];
        op.lower[j] = diffusion * d2.lower + drift * d1.lower;
        op.diag[j] = diffusion * d2.centre + drift * d1.centre + (a + b);
        op.upper[j] = diffusion * d2.upper + drift * d1.upper;
    }
    // Linearity (V_ss = 0) with a one-sided slope, exact for linear V.
    const double h_top = s[m - 1] - s[m - 2];
    op.lower[m - 1] = a * s[m - 1] / h_top;
    op.diag[m - 1] = -a * s[m - 1] / h_top + (a + b);
    if (!absorbing) {
        const double h_bottom = s[1] - s[0];
        op.diag[0] = a * s[0] / h_bottom + (a + b);
        op.upper[0] = -a * s[0] / h_bottom;
    }
    return op;
}

// (I - theta dt L) v_new = (I + (1 - theta) dt L) v_old
std::vector<double> theta_step(const Operator& op, const std::vector<double>& v_old, double dt, double theta) {
    const std::size_t m = v_old.size();
    std::vector<double> lower(m), diag(m), upper(m), rhs(m);
    const double explicit_weight = (1.0 - theta) * dt;
    for (std::size_t j = 0; j < m; ++j) {
        double lv = op.diag[j] * v_old[j];
        if (j > 0) lv += op.lower[j] * v_old[j - 1];
        if (j + 1 < m) lv += op.upper[j] * v_old[j + 1];
        rhs[j] = v_old[j] + explicit_weight * lv;
        lower[j] = -theta * dt * op.lower[j];
        diag[j] = 1.0 - theta * dt * op.diag[j];
        upper[j] = -theta * dt * op.upper[j];
    }
    if (op.dirichlet_lower) {
        lower[0] = 0.0;
        diag[0] = 1.0;
        upper[0] = 0.0;
        rhs[0] = 0.0;
    }
    return solve_tridiagonal(lower, diag, upper, std::move(rhs));
}

double quadratic_interpolate(const std::vector<double>& x, const Eigen::MatrixXd& values, std::size_t row, double s) {
    if (s < x.front() || s > x.back()) throw ValidationError("surface: price outside the grid");
    auto it = std::lower_bound(x.begin(), x.end(), s);
    std::size_t j = static_cast<std::size_t>(it - x.begin());
    if (j < x.size() && x[j] == s) return values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
    // s lies in (x[j-1], x[j]); centre the three nodes on the nearer one.
    std::size_t first = (j < 2 || s - x[j - 1] > x[j] - s) ? j - 1 : j - 2;
    first = std::min(first, x.size() - 3);
    double out = 0.0;
    for (std::size_t i = first; i < first + 3; ++i) {
        double basis = 1.0;
        for (std::size_t l = first; l < first + 3; ++l) {
            if (l != i) basis *= (s - x[l]) / (x[i] - x[l]);
        }
        out += basis * values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i));
    }
    return out;
}

}  // namespace

double OptionSurface::value_at(double s, std::size_t k) const {
    if (k >= t_grid.nodes()) throw ValidationError("surface: time index out of range");
    return quadratic_interpolate(s_grid, values, k, s);
}

double OptionSurface::delta_at(double s, std::size_t k) const {
    if (k >= t_grid.nodes()) throw ValidationError("surface: time index out of range");
    return quadratic_interpolate(s_grid, deltas, k, s);
}

OptionSurface solve_gauge_bs(const PdeProblem& problem) {
    problem.validate();
    const auto& s = problem.s_grid;
    const std::size_t m = s.size();
    const std::size_t steps = problem.t_grid.steps();
    const double dt = problem.t_grid.dt();
    const bool absorbing = problem.payoff.absorbing_lower();

    Eigen::MatrixXd values(static_cast<Eigen::Index>(steps + 1), static_cast<Eigen::Index>(m));
    std::vector<double> v(m);
    for (std::size_t j = 0; j < m; ++j) v[j] = problem.payoff(s[j]);
    if (absorbing) v[0] = 0.0;
    values.row(static_cast<Eigen::Index>(steps)) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(m));

    for (std::size_t k = steps; k-- > 0;) {
        const Operator op = build_operator(s, problem.sigma.interval_value(k), problem.a[k],
                                           problem.b.interval_value(k), absorbing);
        if (k + 1 == steps) {
            // Damp the payoff kink before switching to Crank-Nicolson.
            v = theta_step(op, v, 0.5 * dt, 1.0);
            v = theta_step(op, v, 0.5 * dt, 1.0);
        } else {
            v = theta_step(op, v, dt, 0.5);
        }
        values.row(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(m));
    }
    if (!values.allFinite()) throw ComputationError("pde: solution is not finite");

    Eigen::MatrixXd deltas(values.rows(), values.cols());
    const auto last = static_cast<Eigen::Index>(m - 1);
    for (Eigen::Index k = 0; k < values.rows(); ++k) {
        deltas(k, 0) = (values(k, 1) - values(k, 0)) / (s[1] - s[0]);
        deltas(k, last) = (values(k, last) - values(k, last - 1)) / (s[m - 1] - s[m - 2]);
        for (std::size_t j = 1; j + 1 < m; ++j) {
            const Stencil d1 = first_derivative(s[j] - s[j - 1], s[j + 1] - s[j]);
            const auto jj = static_cast<Eigen::Index>(j);
            deltas(k, jj) = d1.lower * values(k, jj - 1) + d1.centre * values(k, jj) + d1.upper * values(k, jj + 1);
        }
    }
    return OptionSurface{s, problem.t_grid, std::move(values), std::move(deltas)};
}

// ---------------------------------------------------------------------------
// Closed forms and the primed gauge

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double bs_closed_form_rate(double s, double e, double sigma, double tau, double r) {
    if (tau <= 0.0) return std::max(s - e, 0.0);
    const double discount = std::exp(-r * tau);
    if (!(sigma > 0.0)) return std::max(s - e * discount, 0.0);
    const double sd = sigma * std::sqrt(tau);
    const double d1 = (std::log(s / e) + r * tau + 0.5 * sd * sd) / sd;
    const double d2 = d1 - sd;
    return s * normal_cdf(d1) - e * discount * normal_cdf(d2);
}

double bs_closed_form(double s, double e, double sigma, double tau) { return bs_closed_form_rate(s, e, sigma, tau, 0.0); }

double bs_put_closed_form(double s, double e, double sigma, double tau) {
    if (tau <= 0.0) return std::max(e - s, 0.0);
    return bs_closed_form(s, e, sigma, tau) - s + e;
}

EffectiveVol effective_vol(double sigma1, double sigma_hat) {
    if (!(sigma1 >= 0.0) || !(sigma_hat >= 0.0)) throw ValidationError("effective vol: volatilities must be non-negative");
    return {sigma1, sigma_hat, std::hypot(sigma1, sigma_hat)};
}

OptionSurface solve_primed_gauge(const PdeProblem& problem, double sigma_hat) {
    if (!(sigma_hat >= 0.0)) throw ValidationError("primed gauge: sigma-hat must be non-negative");
    std::vector<double> bumped(problem.sigma.values().begin(), problem.sigma.values().end());
    for (double& v : bumped) v = effective_vol(v, sigma_hat).Sigma;
    return solve_gauge_bs(problem.with_a(GaugeFieldA::zero(problem.t_grid))
                              .with_sigma(Series(problem.sigma.grid(), std::move(bumped))));
}

MertonResult merton_residual(const MertonPoint& p) {
    const double diffusion = 0.5 * p.sigma1 * p.sigma1 * p.s * p.s * p.d2v_ds2 +
                             0.5 * p.sigma_hat * p.sigma_hat * p.h * p.h * p.d2v_dh2;
    const double homogeneity = p.v - p.s * p.dv_ds - p.h * p.dv_dh;
    return {p.dv_dt + diffusion + homogeneity * (p.a + p.b), -p.dv_dh};
}

}  // namespace gaugekit
