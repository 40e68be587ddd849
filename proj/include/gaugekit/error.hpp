#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace gaugekit {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: bad shapes, out-of-range parameters, malformed files.
/// Carries optional 1-based row/column coordinates for tabular inputs.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
    ValidationError(const std::string& what, std::optional<std::size_t> row,
                    std::optional<std::size_t> column)
        : Error(what), row_(row), column_(column) {}

    std::optional<std::size_t> row() const noexcept { return row_; }
    std::optional<std::size_t> column() const noexcept { return column_; }

private:
    std::optional<std::size_t> row_;
    std::optional<std::size_t> column_;
};

/// A well-formed request that cannot be computed (infeasible, degenerate).
class ComputationError : public Error {
public:
    using Error::Error;
};

}  // namespace gaugekit
