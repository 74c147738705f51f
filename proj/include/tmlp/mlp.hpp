#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tmlp/core.hpp"
#include "tmlp/rng.hpp"

namespace tmlp {

/// Largest admissible M^n (and therefore largest single loop) of one estimate.
inline constexpr std::uint64_t kMaxSampleCount = 100'000'000;

struct MlpParams {
    int levels = 1;               // n
    std::uint64_t branching = 1;  // M
    Partition partition = Partition::uniform(1, 1.0);
};

struct MlpEstimate {
    double value = 0.0;
    CostLedger ledger;                   // every evaluation, nested estimates included
    std::uint64_t terminal_g_evals = 0;  // g calls of the root's terminal average (= M^n)
};

/// Records every (index, purpose) stream opened during one estimate and throws on
/// reuse. Thread-safe.
class StreamAudit {
public:
    void record(const MultiIndex& index, Purpose purpose);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::set<std::pair<MultiIndex, Purpose>> seen_;
};

struct MlpOptions {
    int threads = 1;
    StreamAudit* audit = nullptr;
};

/// (F(w))(t,x) = f(t, x, w(t,x))
using SpaceTimeFunction = std::function<double(double t, std::span<const double> x)>;
SpaceTimeFunction lift(Nonlinearity f, SpaceTimeFunction w);

/// t + (T − t)·u with u the uniform draw of `key`.
double sample_eval_time(double t, double horizon, const StreamKey& key);

/// One realization of V_{n,M}^{δ,θ}(t,x). The two outer sums of the root run on
/// `options.threads` OpenMP threads; the result is bit-identical for any thread count.
MlpEstimate estimate(const MlpParams& params, double t, std::span<const double> x, const MultiIndex& index,
                     const Problem& problem, std::uint64_t seed, const MlpOptions& options = {});

namespace reference {
/// Plain serial recursion, written directly from the defining formula. Kept as the
/// equivalence oracle for `tmlp::estimate`.
MlpEstimate estimate(const MlpParams& params, double t, std::span<const double> x, const MultiIndex& index,
                     const Problem& problem, std::uint64_t seed);
}  // namespace reference

struct RmseResult {
    double rmse = 0.0;
    double mc_stderr = 0.0;          // jackknife
    double mean = 0.0;
    double mean_total_evals = 0.0;   // mean ledger.total() per replicate
    std::vector<MlpEstimate> replicates;
};

/// R independent root estimates (replicate-tagged indices) compared with `target`.
RmseResult rmse_against(const MlpParams& params, double t, std::span<const double> x, const Problem& problem,
                        double target, std::size_t replicates, std::uint64_t seed, int threads = 1);

/// Same, against problem.reference(t, x). Throws ConfigError when the problem has no reference.
RmseResult rmse(const MlpParams& params, double t, std::span<const double> x, const Problem& problem,
                std::size_t replicates, std::uint64_t seed, int threads = 1);

/// Jackknife standard error of sqrt(mean(sq)).
double jackknife_rms_stderr(std::span<const double> squared_deviations);

// --- cost ----------------------------------------------------------------------

using CostCount = unsigned __int128;

/// Right-hand side of the cost recursion, evaluated with equality in exact integers.
/// Throws CapacityError on 128-bit overflow.
CostCount cost_recursion(int n, std::uint64_t M, const Partition& partition);
/// 4·T·|δ|⁻¹·(5M)^n
long double cost_closed_form(int n, std::uint64_t M, const Partition& partition);
std::string to_string(CostCount value);
/// ⌈T/|δ|⌉ for the partition's horizon.
std::uint64_t ceil_steps(const Partition& partition);

// --- theoretical error bound -----------------------------------------------------

struct ErrorBoundInputs {
    double horizon = 1.0;
    DeclaredConstants constants;
    double lipschitz_f = 0.0;  // L
    double potential_at_x = 0.0;  // U(x)
    double phi_at_x = 1.0;        // φ(x)
};

/// log of the error bound, decomposed. Components that overflow saturate at
/// kLogBoundCeiling and set `saturated`.
struct ErrorBoundLog {
    double log_bracket = 0.0;    // log[e^{M/2}e^{2nLT}M^{-n/2} + (|δ|/T)^{1/2}]
    double log_prefactor = 0.0;  // log[1184 b³ e^{3T+ρT+3LTη^{1/4}+e^{αT}U/4} φ^{1/2}]
    double log_total = 0.0;
    double log_rho = 0.0;        // log ρ
    bool saturated = false;
};

inline constexpr double kLogBoundCeiling = 1e300;

/// log ρ for ρ = (5c^{1+1/κ}p)^{3p}.
double log_rho(const DeclaredConstants& k);
/// log log η(a), where η(a) = exp(exp(2[720 max{T,α,1}(ce^{αT})³]^{(720(ce^{αT})³max{T,1}+7)γ}) min{|a|,1}^{1/8}).
/// Returns +inf when not representable.
double log_log_eta(double a, double horizon, const DeclaredConstants& k);

ErrorBoundLog theoretical_error_bound_log(int n, std::uint64_t M, const Partition& partition,
                                          const ErrorBoundInputs& inputs);

}  // namespace tmlp
