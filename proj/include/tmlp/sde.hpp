#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tmlp/core.hpp"
#include "tmlp/rng.hpp"

namespace tmlp {

/// y ↦ y / (1 + ‖y‖²). The output norm never exceeds 1/2.
std::vector<double> taming_map(std::span<const double> y);
/// In-place form. Throws DomainError on non-finite input.
void taming_map_inplace(std::span<double> y);

/// Allocation-free tamed Euler stepping for one problem. One instance per thread.
class PathSimulator {
public:
    explicit PathSimulator(const Problem& problem);

    /// One step z ← z + 1_{D_h}(z)[μ(z)dt + taming_map(σ(z)dW)]. Returns false, without
    /// evaluating μ or σ, when z lies outside the taming set.
    bool step(std::span<double> z, double dt, std::span<const double> dW, double h, CostLedger& ledger);

    /// Walks `adjoined` from its first point up to `target` with increments keyed by
    /// `brownian.at(i)` for the step whose left grid point has local index i. The final
    /// step ends exactly at `target`.
    void simulate(const Partition& adjoined, std::span<double> state, const StreamBase& brownian,
                  double target, CostLedger& ledger);

    /// Full walk to the last grid point calling visit(i, state) at every grid point i
    /// (including i = 0). Identical states to `simulate` evaluated at grid points.
    template <class Visitor>
    void walk_grid(const Partition& adjoined, std::span<double> state, const StreamBase& brownian,
                   CostLedger& ledger, Visitor&& visit) {
        const double h = adjoined.mesh();
        visit(std::size_t{0}, std::span<const double>(state));
        bool active = true;
        for (std::size_t i = 0; i + 1 < adjoined.size(); ++i) {
            if (active) {
                const double dt = adjoined.point(i + 1) - adjoined.point(i);
                gaussian_increment(brownian.at(i), dt, dw_);
                active = step(state, dt, dw_, h, ledger);
            }
            visit(i + 1, std::span<const double>(state));
        }
    }

    const Problem& problem() const { return *problem_; }

private:
    const Problem* problem_;
    std::vector<double> mu_;
    std::vector<double> sigma_;
    std::vector<double> y_;
    std::vector<double> dw_;
};

/// Single tamed step (allocating convenience form of PathSimulator::step).
std::vector<double> tamed_step(std::span<const double> z, double dt, std::span<const double> dW, double h,
                               const Problem& problem, CostLedger& ledger);

struct TamedPathSpec {
    const Problem* problem = nullptr;
    Partition partition;  // already adjoined: partition.front() == start_time
    double start_time = 0.0;
    std::vector<double> start_state;
    MultiIndex stream_index;
    std::uint64_t seed = 0;
};

/// Y_{t,s}(x) for the spec's start time t and the given target s ∈ [t, T].
std::vector<double> simulate_path(const TamedPathSpec& spec, double target_time, CostLedger& ledger);

// --- taming sets ---------------------------------------------------------------

/// {x : h ≤ 0.5, d^{3η}(‖x‖² + d^η)^{8β} ≤ exp(|ln h|^{1/2})}, evaluated in log space.
bool log_mesh_taming_criterion(double h, std::span<const double> x, std::size_t d, double eta, double beta);
TamingSet log_mesh_taming_set(double eta, double beta);
TamingSet everywhere_taming_set();

// --- strong error --------------------------------------------------------------

struct StrongRateConfig {
    std::vector<std::uint64_t> steps;  // interval counts, strictly increasing; all divide the last
    double moment = 2.0;               // r
    std::size_t paths = 10000;
    std::uint64_t seed = 1;
    std::vector<double> start_state;   // empty means the origin
    int threads = 1;
};

struct StrongRateRow {
    double mesh = 0.0;
    double error = 0.0;   // (E‖Y_T − X_T‖^r)^{1/r}
    double std_error = 0.0; // delta-method Monte Carlo standard error
};

struct StrongRateResult {
    std::vector<StrongRateRow> rows;  // coarse to fine
    double slope = 0.0;               // least-squares slope of log error vs log mesh; NaN if undefined
    bool exact_reference = false;     // false: finest tamed mesh is the reference
};

/// Coupled strong-error experiment at the terminal time. The finest step count fixes
/// the Brownian resolution; coarser schemes consume sums of fine increments. Uses the
/// problem's exact stepper as the reference when present.
StrongRateResult strong_rate_experiment(const Problem& problem, const StrongRateConfig& config);

/// Serial reference of the same experiment (no OpenMP), kept for equivalence tests.
StrongRateResult strong_rate_experiment_serial(const Problem& problem, const StrongRateConfig& config);

/// Least-squares slope of log(y) against log(x) over pairs with x, y > 0.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace tmlp
