#pragma once

#include <vector>

namespace gaugekit {

/// Solves lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i] by the
/// Thomas algorithm (lower[0] and upper[n-1] are ignored). Throws
/// ComputationError on a zero pivot.
std::vector<double> solve_tridiagonal(const std::vector<double>& lower, const std::vector<double>& diag,
                                      const std::vector<double>& upper, std::vector<double> rhs);

}  // namespace gaugekit
