#include "gaugekit/tridiagonal.hpp"

#include <cmath>
#include <string>

#include "gaugekit/error.hpp"

namespace gaugekit {

std::vector<double> solve_tridiagonal(const std::vector<double>& lower, const std::vector<double>& diag,
                                      const std::vector<double>& upper, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n) {
        throw ValidationError("tridiagonal: band lengths differ");
    }
    if (n == 0) return rhs;
    std::vector<double> c(n);
    double pivot = diag[0];
    if (pivot == 0.0 || !std::isfinite(pivot)) throw ComputationError("tridiagonal: zero pivot at row 0");
    c[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i] * c[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            throw ComputationError("tridiagonal: zero pivot at row " + std::to_string(i));
        }
        c[i] = upper[i] / pivot;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
    return rhs;
}

}  // namespace gaugekit
