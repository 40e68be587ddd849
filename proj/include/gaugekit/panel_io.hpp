#pragma once

// Price-panel CSV files:
//
//   date,S&P 500,US Dollar #cash
//   2005-06-30,1,1
//   2005-07-01,1.0021,1
//
// UTF-8, LF line endings, '.' decimal separator, ISO-8601 dates strictly
// increasing, strictly positive prices, at most one column tagged "#cash".
// Dates map to a uniform grid starting at 0 whose step is the mean spacing in
// years of 365.25 days.

#include <filesystem>
#include <string>
#include <string_view>

#include "gaugekit/gauge_core.hpp"

namespace gaugekit {

inline constexpr std::string_view cash_tag = "#cash";
inline constexpr double days_per_year = 365.25;

struct IngestOptions {
    /// Divide every column by its first price so all series start at 1.
    bool normalize = false;
};

/// Parses panel text. Errors carry 1-based coordinates: row counts data rows
/// (the header is row 0), column counts price columns (the date is column 0).
PricePanel parse_panel(std::string_view text, const IngestOptions& options = {});

PricePanel ingest(const std::filesystem::path& path, const IngestOptions& options = {});

/// Serialises with shortest round-trip decimals; synthesises dates from the
/// grid (starting 2000-01-01) when the panel has none.
std::string format_panel(const PricePanel& panel);

void export_panel(const PricePanel& panel, const std::filesystem::path& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace gaugekit
