// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tmlp/analysis.hpp"
#include "tmlp/cli/run.hpp"
#include "tmlp/mlp.hpp"
#include "tmlp/problems.hpp"
#include "tmlp/sde.hpp"

using namespace tmlp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int g_failures = 0;

void report(int id, bool passed, const std::string& title, const std::string& detail) {
    if (!passed) ++g_failures;
    std::printf("%s [%d] %s: %s\n", passed ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
}

void info(const std::string& title, const std::string& detail) {
    std::printf("INFO %s: %s\n", title.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

int worker_threads() { return std::max(1, omp_get_max_threads()); }

cli::ExperimentConfig heat_converge(int n_first, int n_last, std::size_t reps, int threads) {
    cli::ExperimentConfig c;
    c.command = cli::Command::Converge;
    c.problem = BenchmarkId::HeatOracle;
    c.dim = 10;
    c.horizon = 1.0;
    c.n_first = n_first;
    c.n_last = n_last;
    c.branching_rule = cli::BranchingRule::EqualToN;
    c.mesh_rule = cli::MeshRule::Steps;
    c.mesh_steps = 64;
    c.replicates = reps;
    c.seed = 1;
    c.threads = threads;
    return c;
}

std::vector<std::vector<std::string>> csv_without_wall_clock(const cli::RunOutput& out) {
    std::ostringstream s;
    out.table.write(s);
    auto rows = cli::parse_csv(s.str());
    const auto it = std::ranges::find(rows.front(), "wall_ms");
    const auto k = it - rows.front().begin();
    for (auto& r : rows)
        if (static_cast<std::size_t>(k) < r.size()) r.erase(r.begin() + k);
    return rows;
}

// --- 1 ------------------------------------------------------------------------------

void telescoping() {
    const auto start = Clock::now();
    const double T = 1.0, t = 0.25;
    const Problem p = constant_source(3, T);
    const std::vector<double> x{0.1, -0.2, 0.3};
    double worst = 0.0;
    for (int n = 1; n <= 4; ++n)
        for (std::uint64_t M = 1; M <= 3; ++M)
            for (std::uint64_t steps : {1u, 7u, 64u}) {
                const MlpParams params{n, M, Partition::uniform(steps, T)};
                for (std::uint64_t r = 0; r < 3; ++r) {
                    const double v = estimate(params, t, x, MultiIndex::replicate_root(r), p, 1).value;
                    worst = std::max(worst, std::fabs(v - (T - t)) / (T - t));
                }
            }
    const double secs = seconds_since(start);
    report(1, worst <= 1e-12 && secs < 1.0, "telescoping exactness",
           fmt("max relative error %.3e (tol 1e-12), %.3f s (limit 1 s)", worst, secs));
}

// --- 2, 4, 6, 10: heat oracle through the converge command --------------------------------------------------------------------

struct ConvergeRow {
    int n;
    double rmse;
    double stderr_;
    double mean;
    double fe;
};

std::vector<ConvergeRow> rows_of(const cli::RunOutput& out) {
    std::vector<ConvergeRow> rows;
    for (const auto& r : out.report["rows"])
        rows.push_back({r["n"].get<int>(), r["rmse"].get<double>(), r["mc_stderr"].get<double>(),
                        r["mean"].get<double>(), r["fe_measured"].get<double>()});
    return rows;
}

std::vector<ConvergeRow> heat_accuracy() {
    const int threads = worker_threads();
    const auto start = Clock::now();
    const auto rows = rows_of(cli::execute(heat_converge(1, 4, 200, threads)));
    const double secs = seconds_since(start);

    const auto& deep = rows.back();
    report(2, deep.rmse <= 0.5, "heat oracle accuracy (d=10, n=M=4, 64 steps, R=200)",
           fmt("rmse %.4f +- %.4f vs tol 0.5 (u(0,0)=10, mean %.4f); %.1f s for n=1..4 on %d thread(s)",
               deep.rmse, deep.stderr_, deep.mean, secs, threads));
    return rows;
}

void error_decay(const std::vector<ConvergeRow>& rows) {
    bool decreasing = true;
    std::string trail;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && !(rows[i].rmse < rows[i - 1].rmse)) decreasing = false;
        trail += fmt("%s%.4f", i ? ", " : "", rows[i].rmse);
    }
    const double ratio = rows[3].rmse / rows[1].rmse;
    report(4, decreasing && ratio <= 0.5, "MLP error decay in n (n=M=1..4)",
           fmt("rmse [%s]; strictly decreasing=%s; rmse(4)/rmse(2)=%.3f (tol 0.5)", trail.c_str(),
               decreasing ? "yes" : "no", ratio));
}

void tamed_grid_baseline(double mlp_mean) {
    // Informational: the same estimator against a direct Monte Carlo of E‖Y_T‖² on the
    // same 64-step tamed grid separates discretisation bias from MLP error.
    {
        const Problem p = heat_oracle(10);
        const TamedPathSpec spec{&p, Partition::uniform(64, 1.0), 0.0, std::vector<double>(10, 0.0),
                                 MultiIndex{7, 7}, 99};
        const std::size_t N = 200000;
        double s = 0.0, s2 = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            TamedPathSpec path = spec;
            path.stream_index = MultiIndex{7, static_cast<std::int64_t>(k)};
            CostLedger ledger;
            const double g = squared_norm(simulate_path(path, 1.0, ledger));
            s += g;
            s2 += g * g;
        }
        const double mean = s / N, se = std::sqrt((s2 / N - mean * mean) / N);
        info("tamed-grid baseline",
             fmt("direct MC of E g(Y_T) on the 64-step tamed grid = %.4f +- %.4f; MLP mean at n=4 = %.4f; "
                 "exact u(0,0) = 10",
                 mean, se, mlp_mean));
    }
}

void effort_trend(const std::vector<ConvergeRow>& rows) {
    // Effort exponent log(fe)/log(1/rmse) for n = M = 2..5; n = 2..4 come from the
    // accuracy run (same seed and R, levels are independent experiments).
    const auto start = Clock::now();
    const auto five = rows_of(cli::execute(heat_converge(5, 5, 200, worker_threads())));
    const double secs5 = seconds_since(start);
    std::vector<ConvergeRow> trend(rows.begin() + 1, rows.end());
    trend.push_back(five.front());
    std::vector<double> exponent;
    std::string listing;
    bool meaningful = true;
    for (const auto& r : trend) {
        const double e = std::log(r.fe) / std::log(1.0 / r.rmse);
        exponent.push_back(e);
        // The exponent is only an effort-vs-accuracy rate when rmse < 1.
        if (!std::isfinite(e) || !(r.rmse < 1.0)) meaningful = false;
        listing += fmt("%sn=%d: fe=%.3g rmse=%.4f exp=%.3f", listing.empty() ? "" : "; ", r.n, r.fe, r.rmse, e);
    }
    const bool non_increasing = exponent[2] <= exponent[1] && exponent[3] <= exponent[2];
    report(6, meaningful && non_increasing, "effort-vs-accuracy trend (n=M=2..5)",
           fmt("%s; finite with rmse<1=%s, non-increasing from n=3 to 5=%s (n=5 took %.1f s). "
               "The asymptotic exponent 4+delta is not reachable at desk scale.",
               listing.c_str(), meaningful ? "yes" : "no", non_increasing ? "yes" : "no", secs5));
}

void determinism() {
    auto serial_cfg = heat_converge(1, 4, 100, 1);
    auto wide_cfg = heat_converge(1, 4, 100, 8);
    const bool identical = csv_without_wall_clock(cli::execute(serial_cfg)) ==
                           csv_without_wall_clock(cli::execute(wide_cfg));
    report(10, identical, "determinism (converge, threads 1 vs 8)",
           identical ? "CSV identical apart from wall_ms" : "CSV differs");
}

// --- 3 ------------------------------------------------------------------------------

void strong_rate() {
    const auto start = Clock::now();
    StrongRateConfig cfg;
    for (int k = 2; k <= 8; ++k) cfg.steps.push_back(std::uint64_t{1} << k);
    cfg.moment = 2.0;
    cfg.paths = 10000;
    cfg.seed = 1;
    cfg.threads = worker_threads();
    const auto result = strong_rate_experiment(ou_oracle(5, 1.0, 1.0), cfg);
    const double secs = seconds_since(start);
    std::string errors;
    for (const auto& row : result.rows) errors += fmt("%s%.4g", errors.empty() ? "" : ", ", row.error);
    report(3, result.exact_reference && result.slope >= 0.4 && result.slope <= 0.6 && secs <= 120.0,
           "SDE strong rate (OU d=5, k=2..8, r=2, 1e4 paths)",
           fmt("slope %.4f (tol [0.4, 0.6]); errors [%s]; %.1f s (limit 120 s)", result.slope, errors.c_str(),
               secs));
}

// --- 5 ------------------------------------------------------------------------------

void cost_accounting() {
    const Problem p = heat_oracle(10);
    const std::vector<double> x(10, 0.0);
    bool ok = true;
    std::string first_failure;
    int cases = 0;
    for (int n = 1; n <= 4; ++n)
        for (std::uint64_t M = 1; M <= 4; ++M)
            for (std::uint64_t steps : {8u, 64u}) {
                const MlpParams params{n, M, Partition::uniform(steps, 1.0)};
                const auto e = estimate(params, 0.0, x, MultiIndex{}, p, 3, {.threads = worker_threads()});
                const CostCount bound = cost_recursion(n, M, params.partition);
                CostCount closed = CostCount{4} * steps;  // 4·T·|δ|⁻¹·(5M)^n with T/|δ| = steps
                std::uint64_t m_pow_n = 1;
                for (int k = 0; k < n; ++k) {
                    m_pow_n *= M;
                    closed *= 5 * M;
                }
                const bool here =
                    CostCount{e.ledger.total()} <= bound && e.terminal_g_evals == m_pow_n && bound <= closed;
                ++cases;
                if (!here && ok) {
                    ok = false;
                    first_failure = fmt(" first failure at n=%d M=%llu steps=%llu", n,
                                        static_cast<unsigned long long>(M), static_cast<unsigned long long>(steps));
                }
            }
    report(5, ok, "cost accounting (n,M in 1..4, meshes 8 and 64)",
           fmt("%d cases, exact integer comparisons%s", cases, first_failure.c_str()));
}

// --- 7 ------------------------------------------------------------------------------

void lyapunov() {
    bool ok = true;
    std::string detail;
    for (double p : {2.0, 8.0})
        for (double a : {1.0, 10.0}) {
            SamplingConfig cfg;
            cfg.dim = 10;
            cfg.samples = 10000;
            cfg.radius = 10.0;
            const auto r = derivative_bound_check({a, p}, cfg, 1000);
            ok = ok && r.passed(1e-5) && r.fd_points >= 1000;
            detail += fmt("%s(p=%g,a=%g: %zu violations, fd err %.2e)", detail.empty() ? "" : " ", p, a,
                          r.violations + r.direction_violations, r.max_fd_relative_error);
        }
    report(7, ok, "Lyapunov derivative bounds", detail);
}

// --- 8 ------------------------------------------------------------------------------

void taming() {
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> log_scale(-6.0, 6.0);
    std::size_t violations = 0;
    double worst = 0.0;
    std::vector<double> y(5);
    for (int k = 0; k < 1'000'000; ++k) {
        const double scale = std::pow(10.0, log_scale(gen));
        for (double& v : y) v = scale * normal(gen);
        const double norm = std::sqrt(squared_norm(taming_map(y)));
        worst = std::max(worst, norm);
        if (norm > 0.5) ++violations;
    }

    Problem p = heat_oracle(2);
    p.drift = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 5.0); };
    p.taming_set = [](double, std::span<const double> x) { return squared_norm(x) < 9.0; };
    const std::vector<double> start{3.0, 1.0};
    const TamedPathSpec spec{&p, Partition::uniform(16, 1.0), 0.0, start, MultiIndex{0}, 2};
    bool frozen = true;
    for (double s : {0.0, 0.01, 0.2, 0.5, 0.99, 1.0}) {
        CostLedger ledger;
        frozen = frozen && simulate_path(spec, s, ledger) == start && ledger.total() == 0;
    }
    report(8, violations == 0 && frozen, "taming invariants",
           fmt("%zu violations of norm <= 1/2 in 1e6 draws (max %.6f); frozen start returned exactly: %s",
               violations, worst, frozen ? "yes" : "no"));
}

// --- 9 ------------------------------------------------------------------------------

void moment() {
    PathDiagnosticConfig cfg;
    cfg.paths = 10000;
    cfg.threads = worker_threads();
    const LyapunovSpec spec{10.0, 2.0};
    const auto r = moment_growth(ginzburg_landau(10, 1.0), spec, cfg);
    const double log_phi = phi_checked(std::vector<double>(10, 0.0), spec).log_value;
    const bool ok = r.finite() && r.slope <= 200.0 && r.intercept == log_phi && r.log_means.front() == log_phi;
    report(9, ok, "moment growth (Ginzburg-Landau d=10, p=2, a=d)",
           fmt("c_hat %.4f (95%% CI [%.4f, %.4f], tol <= 200); intercept %.17g vs log phi(x) %.17g", r.slope,
               r.ci_low, r.ci_high, r.intercept, log_phi));
}

}  // namespace

int main() {
    std::printf("acceptance: %d worker thread(s)\n", worker_threads());
    telescoping();
    const auto heat = heat_accuracy();
    strong_rate();
    error_decay(heat);
    tamed_grid_baseline(heat.back().mean);
    cost_accounting();
    effort_trend(heat);
    lyapunov();
    taming();
    moment();
    determinism();
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
