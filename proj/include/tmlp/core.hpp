#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmlp {

// Error categories. Each maps to one CLI exit code (see cli/run.hpp).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A non-finite value appeared; the message carries the site (state, index, level).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A step, sample, or integer-size budget would be exceeded.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Problem callbacks. All callbacks must be re-entrant: they are invoked
// concurrently from worker threads.

/// x ∈ ℝ^d  ->  out ∈ ℝ^d
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;
/// x ∈ ℝ^d  ->  out ∈ ℝ^{d×m}, row-major (out[i*m + k] is row i of column σ_k)
using MatrixField = std::function<void(std::span<const double> x, std::span<double> out)>;
using Nonlinearity = std::function<double(double t, std::span<const double> x, double w)>;
using ScalarField = std::function<double(std::span<const double> x)>;
using TamingSet = std::function<bool(double h, std::span<const double> x)>;
using Solution = std::function<double(double t, std::span<const double> x)>;

/// Exact one-step transition of the underlying SDE over an interval of length dt,
/// driven by the Brownian increment dW (length m) and m auxiliary standard normals
/// that are independent of dW. Used as the strong-error reference.
using ExactStepper = std::function<void(std::span<double> x, double dt, std::span<const double> dW,
                                        std::span<const double> aux)>;

/// Constants declared for the error-bound and Lyapunov diagnostics.
struct DeclaredConstants {
    double b = 1.0;
    double c = 1.0;
    double beta = 1.0;
    double p = 8.0;
    double kappa = 1.0;
    double alpha = 0.0;
    double gamma = 1.0;
};

struct Problem {
    std::string name;
    std::size_t dim = 1;           // d
    std::size_t brownian_dim = 1;  // m
    double horizon = 1.0;          // T

    VectorField drift;
    MatrixField diffusion;
    Nonlinearity nonlinearity;
    ScalarField terminal;
    TamingSet taming_set;

    double lipschitz_f = 0.0;

    std::optional<DeclaredConstants> constants;
    Solution reference;         // empty when no exact solution is known
    ScalarField potential;      // U, for exponential-moment diagnostics
    ScalarField potential_rate; // Ū; empty means Ū ≡ 0
    ExactStepper exact_step;    // empty when no exact strong solution is known

    /// Throws ConfigError when dimensions, horizon, callbacks or L are invalid.
    void validate() const;
};

// ---------------------------------------------------------------------------

/// Default cap on the number of intervals of a uniform partition (2^31).
inline constexpr std::uint64_t kDefaultStepCap = std::uint64_t{1} << 31;

/// Strictly increasing time grid t_0 < t_1 < ... < t_n.
///
/// Uniform grids on [0,T] are stored implicitly as (steps, T), so a δ_n grid with
/// n^n intervals costs O(1) memory. Explicit grids share their point array. In
/// both cases `adjoin(t)` is cheap: it records a new start point and the index of
/// the first retained base point.
class Partition {
public:
    static Partition from_points(std::vector<double> points);
    static Partition uniform(std::uint64_t steps, double horizon,
                             std::uint64_t step_cap = kDefaultStepCap);

    std::size_t size() const { return 1 + static_cast<std::size_t>(base_last_ - first_ + 1); }
    std::size_t intervals() const { return size() - 1; }
    double point(std::size_t i) const { return i == 0 ? start_ : base_point(first_ + i - 1); }
    double front() const { return start_; }
    double back() const { return base_point(base_last_); }
    double mesh() const { return mesh_; }

    /// Largest grid point strictly below s (or t_0 when s == t_0).
    double round_down(double s) const { return point(round_down_index(s)); }
    std::size_t round_down_index(double s) const;

    /// The grid (this ∪ {t}) restricted to [t, back()].
    Partition adjoin(double t) const;

    bool is_uniform() const { return !explicit_; }
    /// Number of intervals of the underlying (non-adjoined) grid.
    std::uint64_t base_steps() const { return base_last_; }

    std::vector<double> points() const;

private:
    struct ExplicitGrid {
        std::vector<double> points;
        std::vector<double> suffix_max_gap;  // suffix_max_gap[j] = max gap over intervals j..n-1
    };

    Partition() = default;
    double base_point(std::uint64_t j) const;

    std::shared_ptr<const ExplicitGrid> explicit_;
    std::uint64_t steps_ = 0;  // uniform only
    double horizon_ = 0.0;     // uniform only
    std::uint64_t base_last_ = 0;
    double start_ = 0.0;
    std::uint64_t first_ = 1;  // base index of point(1)
    double mesh_ = 0.0;
};

double round_down(double s, const Partition& partition);
double mesh(const Partition& partition);
/// δ_n = (0, 1, ..., n^n)·T/n^n. Throws CapacityError when n^n exceeds step_cap.
Partition uniform_partition(unsigned n, double horizon, std::uint64_t step_cap = kDefaultStepCap);
Partition adjoin(const Partition& partition, double t);

/// n^n with overflow detection; nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> checked_power(std::uint64_t base, unsigned exponent);

// ---------------------------------------------------------------------------

/// Element of Θ = ⋃ₙ Zⁿ. Every random stream is derived from one of these.
class MultiIndex {
public:
    MultiIndex() : path_{0} {}
    MultiIndex(std::initializer_list<std::int64_t> entries);
    explicit MultiIndex(std::vector<std::int64_t> entries);

    static MultiIndex root() { return MultiIndex{}; }
    /// Root of an independent replicate: the replicate id is prepended to (0).
    static MultiIndex replicate_root(std::uint64_t replicate);

    /// (θ, a, b)
    MultiIndex child(std::int64_t a, std::int64_t b) const;

    std::span<const std::int64_t> entries() const { return path_; }
    std::size_t size() const { return path_.size(); }
    std::string to_string() const;

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<std::int64_t> path_;
};

// ---------------------------------------------------------------------------

/// Exact function-evaluation counters.
///
/// `mu_evals` and `sigma_evals` count raw callback invocations. `coefficient_steps`
/// counts executed tamed steps; each such step evaluates the pair (μ, σ) at one
/// state, which is one unit in `total()`, the quantity compared with the cost
/// recursion.
struct CostLedger {
    std::uint64_t f_evals = 0;
    std::uint64_t g_evals = 0;
    std::uint64_t mu_evals = 0;
    std::uint64_t sigma_evals = 0;
    std::uint64_t coefficient_steps = 0;

    std::uint64_t total() const { return f_evals + g_evals + coefficient_steps; }

    CostLedger& operator+=(const CostLedger& other) {
        f_evals += other.f_evals;
        g_evals += other.g_evals;
        mu_evals += other.mu_evals;
        sigma_evals += other.sigma_evals;
        coefficient_steps += other.coefficient_steps;
        return *this;
    }

    friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

double squared_norm(std::span<const double> x);
bool all_finite(std::span<const double> x);

}  // namespace tmlp
