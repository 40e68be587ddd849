#include "gaugekit/report.hpp"

#include <chrono>
#include <ctime>

#include "gaugekit/error.hpp"

#ifndef GAUGEKIT_VERSION
#define GAUGEKIT_VERSION "0.0.0"
#endif

namespace gaugekit {

using nlohmann::json;

std::string library_version() { return GAUGEKIT_VERSION; }

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

json make_report(const std::string& command, json result, const RunConfig& config, bool canonical) {
    json provenance{{"config_hash", config.hash()},
                    {"seed", config.simulate.seed},
                    {"version", library_version()},
                    {"config", config.to_json()}};
    if (!canonical) provenance["timestamp"] = utc_timestamp();
    return json{{"command", command}, {"provenance", std::move(provenance)}, {"result", std::move(result)}};
}

void validate_report(const json& report) {
    if (!report.is_object()) throw ValidationError("report: not an object");
    for (const char* key : {"command", "provenance", "result"}) {
        if (!report.contains(key)) throw ValidationError(std::string("report: missing '") + key + "'");
    }
    const auto& p = report["provenance"];
    for (const char* key : {"config_hash", "seed", "version"}) {
        if (!p.is_object() || !p.contains(key)) throw ValidationError(std::string("report: provenance lacks '") + key + "'");
    }
}

json error_document(const std::string& kind, const std::string& message, std::optional<std::size_t> row,
                    std::optional<std::size_t> column) {
    json err{{"kind", kind}, {"message", message}};
    if (row) err["row"] = *row;
    if (column) err["column"] = *column;
    return json{{"error", std::move(err)}};
}

json to_json(const TimeGrid& grid) { return json{{"t0", grid.t0()}, {"dt", grid.dt()}, {"steps", grid.steps()}}; }

json to_json(const Series& series) {
    return json{{"grid", to_json(series.grid())},
                {"layout", series.layout() == Layout::nodes ? "nodes" : "intervals"},
                {"values", std::vector<double>(series.values().begin(), series.values().end())}};
}

}  // namespace gaugekit
