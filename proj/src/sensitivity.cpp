#include <algorithm>
#include <cmath>
#include <string>

#include "gaugekit/error.hpp"
#include "gaugekit/riskfree.hpp"

namespace gaugekit {

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, double lo, double hi) {
    const auto n = v.size();
    if (n == 0) throw ValidationError("projection: empty vector");
    if (lo > hi || static_cast<double>(n) * lo > 1.0 + 1e-12 || static_cast<double>(n) * hi < 1.0 - 1e-12) {
        throw ValidationError("projection: the capped simplex is empty");
    }
    // w(tau) = clamp(v - tau, lo, hi) has a sum decreasing in tau; bracket and bisect.
    auto total = [&](double tau) { return (v.array() - tau).cwiseMax(lo).cwiseMin(hi).sum(); };
    double tau_lo = v.minCoeff() - hi;
    double tau_hi = v.maxCoeff() - lo;
    for (int it = 0; it < 200 && tau_hi - tau_lo > 1e-15 * (1.0 + std::abs(tau_hi)); ++it) {
        const double mid = 0.5 * (tau_lo + tau_hi);
        if (total(mid) > 1.0) {
            tau_lo = mid;
        } else {
            tau_hi = mid;
        }
    }
    // Re-solve tau exactly on the identified free set so the sum is 1 to rounding.
    double tau = 0.5 * (tau_lo + tau_hi);
    double clamped_sum = 0.0, free_sum = 0.0;
    Eigen::Index free_count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = v(i) - tau;
        if (x <= lo) {
            clamped_sum += lo;
        } else if (x >= hi) {
            clamped_sum += hi;
        } else {
            free_sum += v(i);
            ++free_count;
        }
    }
    if (free_count > 0) tau = (free_sum - (1.0 - clamped_sum)) / static_cast<double>(free_count);
    Eigen::VectorXd w = (v.array() - tau).cwiseMax(lo).cwiseMin(hi).matrix();
    if (free_count > 0) {
        // Put the remaining rounding residue on a free coordinate.
        for (Eigen::Index i = 0; i < n; ++i) {
            if (w(i) > lo && w(i) < hi) {
                w(i) = std::clamp(w(i) + 1.0 - w.sum(), lo, hi);
                break;
            }
        }
    }
    return w;
}

namespace {

double residual_norm(const Eigen::MatrixXd& g, const Eigen::VectorXd& w) { return (g.transpose() * w).norm(); }

// Minimum-norm correction of w that zeroes the residual on the coordinates
// strictly inside the box while keeping the bound coordinates fixed.
std::optional<Eigen::VectorXd> polish(const Eigen::MatrixXd& g, const Eigen::VectorXd& w, double lo, double hi) {
    const double eps = 1e-13 * std::max(1.0, hi);
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) > lo + eps && w(i) < hi - eps) free.push_back(i);
    }
    if (free.empty()) return std::nullopt;
    const auto f = static_cast<Eigen::Index>(free.size());
    const auto m = g.cols();
    Eigen::MatrixXd system(m + 1, f);
    Eigen::VectorXd current(f);
    for (Eigen::Index j = 0; j < f; ++j) {
        system.block(0, j, m, 1) = g.row(free[static_cast<std::size_t>(j)]).transpose();
        system(m, j) = 1.0;
        current(j) = w(free[static_cast<std::size_t>(j)]);
    }
    Eigen::VectorXd target(m + 1);
    target.head(m) = -(g.transpose() * w - system.topRows(m) * current);
    target(m) = 1.0 - (w.sum() - current.sum());
    const Eigen::VectorXd delta =
        system.completeOrthogonalDecomposition().solve(target - system * current);
    Eigen::VectorXd out = w;
    for (Eigen::Index j = 0; j < f; ++j) {
        const double x = current(j) + delta(j);
        if (x < lo - 1e-12 || x > hi + 1e-12) return std::nullopt;
        out(free[static_cast<std::size_t>(j)]) = std::clamp(x, lo, hi);
    }
    if (std::abs(out.sum() - 1.0) > 1e-12) return std::nullopt;
    return out;
}

}  // namespace

SensitivityResult sensitivity_neutral_weights(const SensitivityProblem& problem) {
    const Eigen::MatrixXd& g = problem.dmu_dxi;
    const auto n = g.rows();
    if (n < 2) throw ValidationError("sensitivity: need at least two assets");
    if (g.cols() < 1) throw ValidationError("sensitivity: need at least one environment factor");
    if (g.cols() >= n) {
        throw ValidationError("sensitivity: need more assets than environment factors (N = " + std::to_string(n) +
                              ", factors = " + std::to_string(g.cols()) + ")");
    }
    if (!g.allFinite()) throw ValidationError("sensitivity: non-finite sensitivity matrix");
    if (!(problem.floor >= 0.0) || !(problem.cap >= 1.0) || problem.floor > 1.0) {
        throw ValidationError("sensitivity: need 0 <= floor <= 1 <= cap");
    }
    const double lo = problem.floor / static_cast<double>(n);
    const double hi = problem.cap / static_cast<double>(n);

    const Eigen::VectorXd equal = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    Eigen::VectorXd w = equal;
    if (problem.base) {
        if (problem.base->size() != n) throw ValidationError("sensitivity: base weights have the wrong length");
        w = project_capped_simplex(*problem.base, lo, hi);
    }
    const double equal_residual = residual_norm(g, equal);
    Eigen::VectorXd best = equal;
    double best_residual = equal_residual;
    auto consider = [&](const Eigen::VectorXd& candidate) {
        const double r = residual_norm(g, candidate);
        if (r < best_residual) {
            best_residual = r;
            best = candidate;
        }
    };
    consider(w);

    const Eigen::MatrixXd gram = g * g.transpose();
    const double lipschitz = std::max(gram.operatorNorm(), 1e-300);
    const double step = 1.0 / lipschitz;
    const double target = problem.tolerance * 1e-2;

    // FISTA with gradient-based adaptive restart.
    Eigen::VectorXd y = w;
    double t = 1.0;
    std::size_t it = 0;
    std::size_t stalled = 0;
    for (; it < problem.max_iterations && best_residual > target; ++it) {
        const Eigen::VectorXd next = project_capped_simplex(y - step * (gram * y), lo, hi);
        const double move = (next - w).norm();
        if ((y - next).dot(next - w) > 0.0) {
            t = 1.0;  // momentum is pointing uphill
            y = next;
        } else {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            y = next + ((t - 1.0) / t_next) * (next - w);
            t = t_next;
        }
        w = next;
        consider(w);
        stalled = move <= 1e-16 * (1.0 + w.norm()) ? stalled + 1 : 0;
        if ((it + 1) % 256 == 0 || stalled > 0) {
            if (auto p = polish(g, w, lo, hi)) consider(*p);
        }
        if (stalled > 8) break;
    }
    if (auto p = polish(g, best, lo, hi)) consider(*p);

    SensitivityResult out{WeightVector::normalized(best), 0.0, equal_residual, false, it};
    out.residual = residual_norm(g, out.weights.w());
    out.neutral = out.residual <= problem.tolerance;
    return out;
}

}  // namespace gaugekit
