#pragma once

// Finite-difference pricing of a single-asset derivative under the background
// fields A (price gauge) and B (the option's own trade-unit factor):
//
//   dV/dt + 1/2 sigma^2 s^2 V_ss - A s V_s + (A + B) V = 0,
//
// solved backward from the payoff. A = -r, B = 0 is the textbook equation with
// rate r; A = 0 is the natural gauge for risk-free-denominated prices.

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gaugekit/gauge_core.hpp"
#include "gaugekit/time_grid.hpp"

namespace gaugekit {

enum class PayoffKind { call, put, digital_call, share, custom };

class Payoff {
public:
    static Payoff call(double strike);
    static Payoff put(double strike);
    static Payoff digital_call(double strike);
    /// V(s, T) = s.
    static Payoff share();
    static Payoff custom(std::function<double(double)> fn, bool continuous);

    double operator()(double s) const;
    PayoffKind kind() const noexcept { return kind_; }
    double strike() const noexcept { return strike_; }
    bool continuous() const noexcept { return continuous_; }
    /// Calls vanish at the lower edge, which is then held at zero.
    bool absorbing_lower() const noexcept { return kind_ == PayoffKind::call || kind_ == PayoffKind::digital_call; }

private:
    Payoff(PayoffKind kind, double strike, std::function<double(double)> fn, bool continuous)
        : kind_(kind), strike_(strike), fn_(std::move(fn)), continuous_(continuous) {}
    PayoffKind kind_;
    double strike_;
    std::function<double(double)> fn_;
    bool continuous_;
};

/// Geometric grid with `intervals` steps from lo to hi (end points exact).
std::vector<double> log_spaced_grid(double lo, double hi, std::size_t intervals);

/// [strike / 8, 8 strike] with the strike on the middle node; `intervals` must be even.
std::vector<double> default_price_grid(double strike, std::size_t intervals = 400);

struct PdeProblem {
    std::vector<double> s_grid;  ///< strictly increasing, positive
    TimeGrid t_grid;             ///< t_grid.end() is the expiry
    Series sigma;                ///< sigma_1(t), node or interval layout
    GaugeFieldA a;
    Series b;                    ///< B(t) for the option's trade unit
    Payoff payoff;

    /// A = B = 0, constant sigma, default price grid around the strike (or
    /// around 1 for strike-free payoffs), `t_steps` steps over [0, tau].
    static PdeProblem standard(Payoff payoff, double sigma, double tau, std::size_t s_intervals = 400,
                               std::size_t t_steps = 400);

    PdeProblem with_a(GaugeFieldA field) const;
    PdeProblem with_b(Series rate) const;
    PdeProblem with_sigma(Series vol) const;

    /// Throws ValidationError when ill-posed (see solve_gauge_bs).
    void validate() const;
};

struct OptionSurface {
    std::vector<double> s_grid;
    TimeGrid t_grid;
    Eigen::MatrixXd values;  ///< [time nodes x price nodes]
    Eigen::MatrixXd deltas;  ///< dV/ds, same shape

    /// Quadratic interpolation in s on time node k.
    double value_at(double s, std::size_t k = 0) const;
    double delta_at(double s, std::size_t k = 0) const;
};

/// Crank-Nicolson in time with two backward-Euler half steps after expiry,
/// three-point second-order stencils on the (non-uniform) price grid.
/// Boundaries: V_ss = 0 at the top; zero at the bottom for calls, V_ss = 0
/// otherwise. Throws ValidationError with fewer than 3 interior price nodes or
/// for sigma identically zero with a discontinuous payoff.
OptionSurface solve_gauge_bs(const PdeProblem& problem);

/// Zero-rate Black-Scholes call; intrinsic value when tau <= 0.
double bs_closed_form(double s, double e, double sigma, double tau);
/// Textbook rate-r Black-Scholes call.
double bs_closed_form_rate(double s, double e, double sigma, double tau, double r);
/// Zero-rate Black-Scholes put.
double bs_put_closed_form(double s, double e, double sigma, double tau);

struct EffectiveVol {
    double sigma1 = 0.0;
    double sigma_hat = 0.0;
    double Sigma = 0.0;  ///< sqrt(sigma1^2 + sigma_hat^2)
};

EffectiveVol effective_vol(double sigma1, double sigma_hat);

/// The A' = 0 gauge: A replaced by zero and sigma_1(t) by sqrt(sigma_1(t)^2 + sigma_hat^2).
OptionSurface solve_primed_gauge(const PdeProblem& problem, double sigma_hat);

/// Inputs for the gauge-invariant two-price (s, H) pricing equation.
struct MertonPoint {
    double v = 0.0;
    double dv_dt = 0.0;
    double dv_ds = 0.0;
    double dv_dh = 0.0;
    double d2v_ds2 = 0.0;
    double d2v_dh2 = 0.0;
    double s = 0.0;
    double h = 0.0;
    double sigma1 = 0.0;
    double sigma_hat = 0.0;
    double a = 0.0;
    double b = 0.0;
};

struct MertonResult {
    double residual = 0.0;     ///< V_t + 1/2 s1^2 s^2 V_ss + 1/2 sh^2 H^2 V_HH + (V - s V_s - H V_H)(A + B)
    double hedge_ratio = 0.0;  ///< -dV/dH
};

MertonResult merton_residual(const MertonPoint& point);

}  // namespace gaugekit
