#pragma once

// Reference implementations used only by the tests. They are written to be
// obviously correct rather than fast, and share no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gaugekit/gauge_core.hpp"

namespace oracle {

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

/// Discounted expectation of a call payoff under the log-normal law with
/// drift r, by quadrature over the standard normal variable.
inline double call_price(double s, double e, double sigma, double tau, double r) {
    const double sd = sigma * std::sqrt(tau);
    const double z_star = (std::log(e / s) - (r - 0.5 * sigma * sigma) * tau) / sd;
    auto integrand = [&](double z) {
        const double st = s * std::exp((r - 0.5 * sigma * sigma) * tau + sd * z);
        return (st - e) * normal_pdf(z);
    };
    return std::exp(-r * tau) * simpson(integrand, z_star, std::max(z_star, 0.0) + 12.0, 20000);
}

/// Trapezoid integral of samples f_k taken dt apart.
inline double trapezoid(const std::vector<double>& f, double dt) {
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < f.size(); ++k) sum += 0.5 * (f[k] + f[k + 1]) * dt;
    return sum;
}

/// A smooth random gauge parameter: a random linear trend plus a few sinusoids.
inline gaugekit::GaugeScalar random_phi(const gaugekit::TimeGrid& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double trend = 0.1 * u(rng);
    const double level = u(rng);
    double amp[3], freq[3], shift[3];
    for (int j = 0; j < 3; ++j) {
        amp[j] = 0.2 * u(rng);
        freq[j] = 1.0 + 5.0 * std::abs(u(rng));
        shift[j] = 3.0 * u(rng);
    }
    std::vector<double> phi(grid.nodes());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double t = grid.at(k);
        phi[k] = level + trend * t;
        for (int j = 0; j < 3; ++j) phi[k] += amp[j] * std::sin(freq[j] * t + shift[j]);
    }
    return gaugekit::GaugeScalar(gaugekit::Series(grid, std::move(phi)));
}

/// Brute-force minimum of ||G^T w|| over { sum w = 1, lo <= w <= hi } for small
/// N: every point of a simplex lattice with spacing 1/m inside the box, then
/// pairwise exchanges (move mass between two coordinates, exact line search)
/// from the best lattice points until nothing improves.
inline double min_residual_small(const Eigen::MatrixXd& g, double lo, double hi, int m = 12) {
    const int n = static_cast<int>(g.rows());
    auto residual = [&](const Eigen::VectorXd& w) { return (g.transpose() * w).norm(); };
    std::vector<Eigen::VectorXd> starts;
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(n);
    // Enumerate compositions of m into n parts.
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n - 1) {
            counts(i) = left;
            Eigen::VectorXd w = counts.cast<double>() / m;
            if ((w.array() >= lo - 1e-12).all() && (w.array() <= hi + 1e-12).all()) starts.push_back(w);
            return;
        }
        for (int c = 0; c <= left; ++c) {
            counts(i) = c;
            rec(i + 1, left - c);
        }
    };
    rec(0, m);
    if (starts.empty()) starts.push_back(Eigen::VectorXd::Constant(n, 1.0 / n));
    std::sort(starts.begin(), starts.end(),
              [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return residual(a) < residual(b); });
    starts.resize(std::min<std::size_t>(starts.size(), 40));
    starts.push_back(Eigen::VectorXd::Constant(n, 1.0 / n));

    double best = std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd q = g * g.transpose();
    for (Eigen::VectorXd w : starts) {
        w = w.cwiseMax(lo).cwiseMin(hi);
        w /= w.sum();
        for (int sweep = 0; sweep < 20000; ++sweep) {
            double gain = 0.0;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    // w + t (e_i - e_j); f(t) = f(0) + t d + t^2 c / 2
                    const double d = (q.row(i) - q.row(j)).dot(w);
                    const double c = q(i, i) + q(j, j) - 2.0 * q(i, j);
                    if (c <= 0.0) continue;
                    double t = -d / c;
                    t = std::clamp(t, std::max(lo - w(i), w(j) - hi), std::min(hi - w(i), w(j) - lo));
                    const double delta = t * d + 0.5 * t * t * c;
                    if (delta < 0.0) {
                        w(i) += t;
                        w(j) -= t;
                        gain -= delta;
                    }
                }
            }
            if (gain <= 1e-30) break;
        }
        best = std::min(best, residual(w));
    }
    return best;
}

}  // namespace oracle
