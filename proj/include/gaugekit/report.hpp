#pragma once

// Report documents: {"command", "provenance", "result"}. The provenance block
// is mandatory and carries what is needed to reproduce the run.

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gaugekit/config.hpp"
#include "gaugekit/time_grid.hpp"

namespace gaugekit {

std::string library_version();

/// Wraps a result. With `canonical` the timestamp is left out, so identical
/// config and seed give byte-identical documents.
nlohmann::json make_report(const std::string& command, nlohmann::json result, const RunConfig& config,
                           bool canonical);

/// Throws ValidationError unless the document has a command, a complete
/// provenance block and a result.
void validate_report(const nlohmann::json& report);

/// Machine-readable error: {"error": {"kind", "message", "row"?, "column"?}}.
nlohmann::json error_document(const std::string& kind, const std::string& message,
                              std::optional<std::size_t> row = std::nullopt,
                              std::optional<std::size_t> column = std::nullopt);

nlohmann::json to_json(const TimeGrid& grid);
nlohmann::json to_json(const Series& series);

}  // namespace gaugekit
