#pragma once

#include <json.hpp>
#include <ostream>

#include "tmlp/cli/config.hpp"
#include "tmlp/cli/csv.hpp"

namespace tmlp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;    // invalid flags, values or problem setup
inline constexpr int kExitNumeric = 3;   // non-finite value (with site) or I/O failure
inline constexpr int kExitCapacity = 4;  // step, sample or integer-size cap exceeded

inline constexpr int kReportSchemaVersion = 1;

struct RunOutput {
    CsvTable table;
    nlohmann::json report;
};

/// Performs the experiment without touching the filesystem. Throws the library's
/// error types.
RunOutput execute(const ExperimentConfig& config);

/// execute() plus CSV/JSON output; maps exceptions to exit codes and writes the
/// message to `err`.
int run(const ExperimentConfig& config, std::ostream& err);

/// Parses argv and runs. `out` receives --help text.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tmlp::cli
