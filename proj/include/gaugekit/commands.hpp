#pragma once

// Subcommand dispatch shared by the command-line tool and the Python module.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaugekit/config.hpp"

namespace gaugekit {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_computation = 2 };

struct CommandRequest {
    std::string command;                     ///< simulate, gauge, riskfree, price, discount, sensitivity
    RunConfig config;
    std::optional<std::string> panel_path;   ///< price panel CSV (gauge, discount)
    bool normalize = false;                  ///< normalise the panel to 1 at inception on ingest
    bool canonical = false;                  ///< omit the timestamp
    std::optional<std::string> panel_output; ///< simulate: write path 0 as a panel CSV
};

struct CommandOutcome {
    int exit_code = exit_ok;
    nlohmann::json document;  ///< the report, or an error document
};

const std::vector<std::string>& command_names();

/// Runs one subcommand; never throws for library errors. Validation and usage
/// problems exit with 1, computation failures with 2.
CommandOutcome run(const CommandRequest& request);

/// The result section of one subcommand. Throws on failure.
nlohmann::json execute(const CommandRequest& request);

}  // namespace gaugekit
