#include "tmlp/cli/config.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "tmlp/mlp.hpp"

namespace tmlp::cli {

namespace {

template <class T>
T parse_number(std::string_view text, std::string_view what) {
    T value{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
    return value;
}

std::pair<int, int> parse_range(std::string_view text, std::string_view what) {
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        const int v = parse_number<int>(text, what);
        return {v, v};
    }
    const int lo = parse_number<int>(text.substr(0, dots), what);
    const int hi = parse_number<int>(text.substr(dots + 2), what);
    if (lo > hi) throw ConfigError(std::string(what) + " range must be ascending: '" + std::string(text) + "'");
    return {lo, hi};
}

std::vector<double> parse_point(std::string_view text) {
    if (text == "origin") return {};
    std::vector<double> x;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        x.push_back(parse_number<double>(piece, "--x entry"));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return x;
}

void apply_mesh(ExperimentConfig& c, std::string_view text) {
    if (text == "delta-n") {
        c.mesh_rule = MeshRule::DeltaN;
    } else if (text == "m-pow-m") {
        c.mesh_rule = MeshRule::MPowM;
    } else if (text.starts_with("steps=")) {
        c.mesh_rule = MeshRule::Steps;
        c.mesh_steps = parse_number<std::uint64_t>(text.substr(6), "--mesh steps");
    } else {
        throw ConfigError("invalid --mesh '" + std::string(text) + "' (expected delta-n, m-pow-m or steps=N)");
    }
}

}  // namespace

std::string command_name(Command command) {
    switch (command) {
        case Command::Solve: return "solve";
        case Command::Converge: return "converge";
        case Command::SdeRate: return "sde-rate";
        case Command::Cost: return "cost";
        case Command::Verify: return "verify";
    }
    return "unknown";
}

int default_threads() {
    if (const char* env = std::getenv("TMLP_THREADS")) {
        int v = 0;
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc{} && ptr == s.data() + s.size() && v >= 1) return v;
    }
    return 1;
}

std::optional<ExperimentConfig> parse_arguments(int argc, const char* const* argv, std::string& help) {
    ExperimentConfig c;
    c.threads = default_threads();

    CLI::App app{"Multilevel Picard solver for semilinear parabolic PDEs with tamed Euler paths", "tmlp"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.config_formatter(std::make_shared<CLI::ConfigINI>());
    app.set_config("--config", "", "flat key=value file; command-line flags take precedence");

    std::string problem = std::string(benchmark_name(c.problem));
    std::optional<std::string> n_single, n_range, branching, mesh, x_text, taming, k_range;
    std::optional<std::uint64_t> steps;

    app.add_option("--problem", problem, "lotka-volterra | ginzburg-landau | heat-oracle | ou-oracle | constant-source")
        ->capture_default_str();
    app.add_option("--dim", c.dim, "state dimension d")->capture_default_str();
    app.add_option("--T", c.horizon, "horizon T")->capture_default_str();
    app.add_option("--theta", c.theta, "OU reversion rate")->capture_default_str();
    app.add_option("--taming", taming, "taming set: log-mesh | everywhere (default: per problem)");
    app.add_option("--n", n_single, "Picard level n (single)");
    app.add_option("--n-range", n_range, "Picard levels A..B");
    app.add_option("--M", branching, "branching M: an integer or equal-to-n (default equal-to-n)");
    app.add_option("--mesh", mesh, "inner partition: delta-n | m-pow-m | steps=N (default steps=64)");
    app.add_option("--steps", steps, "shorthand for --mesh steps=N");
    app.add_option("--reps", c.replicates, "replicates R")->capture_default_str();
    app.add_option("--seed", c.seed, "experiment seed")->capture_default_str();
    app.add_option("--t", c.t, "evaluation time t")->capture_default_str();
    app.add_option("--x", x_text, "evaluation point: origin or comma-separated values (one value is broadcast)");
    app.add_option("--threads", c.threads, "worker threads (default $TMLP_THREADS or 1)");
    app.add_option("--k-range", k_range, "sde-rate meshes T/2^k for k in A..B (default 2..8)");
    app.add_option("--moment", c.moment, "sde-rate moment order r")->capture_default_str();
    app.add_option("--paths", c.paths, "sde-rate paths")->capture_default_str();
    app.add_option("--samples", c.samples, "verify sample points")->capture_default_str();
    app.add_option("--out", c.out, "CSV output path (default stdout)");
    app.add_option("--report", c.report, "JSON report path");

    const std::pair<Command, const char*> commands[] = {
        {Command::Solve, "one estimate per replicate"},
        {Command::Converge, "RMSE and cost over a range of n"},
        {Command::SdeRate, "strong convergence rate of the tamed scheme"},
        {Command::Cost, "cost recursion and closed-form bound"},
        {Command::Verify, "sampled property checks"},
    };
    std::vector<std::pair<Command, CLI::App*>> subs;
    for (const auto& [cmd, text] : commands) subs.emplace_back(cmd, app.add_subcommand(command_name(cmd), text)->fallthrough());
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        help = app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    for (const auto& [cmd, sub] : subs)
        if (sub->parsed()) c.command = cmd;
    c.problem = parse_benchmark(problem);
    if (taming) c.taming = parse_taming(*taming);
    if (n_range) std::tie(c.n_first, c.n_last) = parse_range(*n_range, "--n-range");
    if (n_single) c.n_first = c.n_last = parse_number<int>(*n_single, "--n");
    if (branching) {
        if (*branching == "equal-to-n") {
            c.branching_rule = BranchingRule::EqualToN;
        } else {
            c.branching_rule = BranchingRule::Fixed;
            c.branching = parse_number<std::uint64_t>(*branching, "--M");
        }
    }
    if (mesh) apply_mesh(c, *mesh);
    if (steps) {
        c.mesh_rule = MeshRule::Steps;
        c.mesh_steps = *steps;
    }
    if (k_range) std::tie(c.k_first, c.k_last) = parse_range(*k_range, "--k-range");
    if (x_text) c.x = parse_point(*x_text);

    if (c.dim < 1) throw ConfigError("--dim must be >= 1");
    if (!(c.horizon > 0.0)) throw ConfigError("--T must be positive");
    if (c.n_first < 0) throw ConfigError("--n must be >= 0");
    if (c.branching_rule == BranchingRule::Fixed && c.branching < 1) throw ConfigError("--M must be >= 1");
    if (c.mesh_rule == MeshRule::Steps && c.mesh_steps < 1) throw ConfigError("--mesh steps must be >= 1");
    if (c.threads < 1) throw ConfigError("--threads must be >= 1");
    if (c.k_first < 0 || c.k_last > 30) throw ConfigError("--k-range must lie in 0..30");
    if (c.x.size() == 1 && c.dim > 1) c.x.assign(c.dim, c.x.front());
    if (!c.x.empty() && c.x.size() != c.dim) throw ConfigError("--x must have d entries");
    if (!(c.t >= 0.0) || !(c.t <= c.horizon)) throw ConfigError("--t must lie in [0, T]");
    return c;
}

std::uint64_t branching_for(const ExperimentConfig& config, int n) {
    if (config.branching_rule == BranchingRule::Fixed) return config.branching;
    return static_cast<std::uint64_t>(std::max(n, 1));
}

Partition partition_for(const ExperimentConfig& config, int n) {
    switch (config.mesh_rule) {
        case MeshRule::DeltaN: return uniform_partition(static_cast<unsigned>(std::max(n, 1)), config.horizon);
        case MeshRule::MPowM: {
            const std::uint64_t M = branching_for(config, n);
            const auto steps = checked_power(M, static_cast<unsigned>(M));
            if (!steps || *steps > kDefaultStepCap)
                throw CapacityError("M^M = " + std::to_string(M) + "^" + std::to_string(M) + " exceeds the step cap");
            return Partition::uniform(*steps, config.horizon);
        }
        case MeshRule::Steps: return Partition::uniform(config.mesh_steps, config.horizon);
    }
    throw ConfigError("unknown mesh rule");
}

}  // namespace tmlp::cli
