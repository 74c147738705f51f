#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmlp/core.hpp"
#include "tmlp/problems.hpp"

namespace tmlp::cli {

enum class Command { Solve, Converge, SdeRate, Cost, Verify };

enum class BranchingRule {
    Fixed,     // --M <int>
    EqualToN,  // --M equal-to-n
};

enum class MeshRule {
    DeltaN,  // n^n uniform steps
    MPowM,   // M^M uniform steps
    Steps,   // a fixed number of uniform steps
};

/// Every knob of one harness invocation. All fields have defaults, so an empty
/// `converge` invocation runs the heat oracle end to end.
struct ExperimentConfig {
    Command command = Command::Converge;

    BenchmarkId problem = BenchmarkId::HeatOracle;
    std::size_t dim = 10;
    double horizon = 1.0;
    double theta = 1.0;
    std::optional<TamingChoice> taming;

    int n_first = 1;
    int n_last = 4;
    BranchingRule branching_rule = BranchingRule::EqualToN;
    std::uint64_t branching = 4;
    MeshRule mesh_rule = MeshRule::Steps;
    std::uint64_t mesh_steps = 64;

    std::size_t replicates = 100;
    std::uint64_t seed = 1;
    double t = 0.0;
    std::vector<double> x;  // empty means the origin
    int threads = 1;

    // sde-rate
    int k_first = 2;
    int k_last = 8;
    double moment = 2.0;
    std::size_t paths = 10000;

    // verify
    std::size_t samples = 10000;

    std::string out;     // CSV path; empty writes to stdout
    std::string report;  // JSON path; empty skips the report
};

std::string command_name(Command command);

/// Parses argv (flags override values read from --config). Throws ConfigError on any
/// invalid flag or value. Returns std::nullopt when --help was requested; `help`
/// then holds the usage text.
std::optional<ExperimentConfig> parse_arguments(int argc, const char* const* argv, std::string& help);

/// Thread count from the TMLP_THREADS environment variable (1 when unset or invalid).
int default_threads();

std::uint64_t branching_for(const ExperimentConfig& config, int n);
/// The inner-path partition for level n. Throws CapacityError for oversized grids.
Partition partition_for(const ExperimentConfig& config, int n);

}  // namespace tmlp::cli
