#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tmlp/core.hpp"

namespace tmlp {

/// φ(x) = (a + ‖x‖²)^p
struct LyapunovSpec {
    double offset = 1.0;  // a > 0
    double power = 2.0;   // p ≥ 3/2
    /// Throws ConfigError when a ≤ 0 or p < 3/2.
    void validate() const;
};

struct PhiValue {
    double value = 0.0;      // saturates at the largest finite double
    double log_value = 0.0;  // p·log(a + ‖x‖²), always exact
    bool saturated = false;
};

PhiValue phi_checked(std::span<const double> x, const LyapunovSpec& spec);
double phi(std::span<const double> x, const LyapunovSpec& spec);

/// Multilinear derivative forms of φ, from the closed expressions
///   Dφ[u]       = 2pA^{p−1}⟨x,u⟩
///   D²φ[u,v]    = 4p(p−1)A^{p−2}⟨x,u⟩⟨x,v⟩ + 2pA^{p−1}⟨u,v⟩
///   D³φ[u,v,w]  = 8p(p−1)(p−2)A^{p−3}⟨x,u⟩⟨x,v⟩⟨x,w⟩
///                 + 4p(p−1)A^{p−2}(⟨u,v⟩⟨x,w⟩ + ⟨u,w⟩⟨x,v⟩ + ⟨v,w⟩⟨x,u⟩)
/// with A = a + ‖x‖².
double phi_d1(std::span<const double> x, std::span<const double> u, const LyapunovSpec& spec);
double phi_d2(std::span<const double> x, std::span<const double> u, std::span<const double> v,
              const LyapunovSpec& spec);
double phi_d3(std::span<const double> x, std::span<const double> u, std::span<const double> v,
              std::span<const double> w, const LyapunovSpec& spec);
void phi_gradient(std::span<const double> x, const LyapunovSpec& spec, std::span<double> out);

/// Operator norms ‖D^iφ(x)‖ for i = 1, 2, 3 (exact: φ is radial, so the norms reduce to
/// one-dimensional maximizations over the angle with x).
struct PhiDerivativeNorms {
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};
PhiDerivativeNorms phi_derivative_norms(std::span<const double> x, const LyapunovSpec& spec);

/// log[(2p)^i φ(x)^{1−i/(2p)}]
double log_derivative_bound(int order, std::span<const double> x, const LyapunovSpec& spec);

// --- sampled verifiers -------------------------------------------------------------

struct SamplingConfig {
    std::size_t dim = 10;
    std::size_t samples = 10000;
    double radius = 10.0;  // points have ‖x‖ uniform in [0, radius]
    std::uint64_t seed = 1;
};

/// Point k of a sampling run: uniform direction, ‖x‖ uniform in [0, radius].
std::vector<double> sample_point(const SamplingConfig& config, std::uint64_t k);

struct DerivativeCheckReport {
    std::size_t points = 0;
    std::size_t violations = 0;            // ‖D^iφ‖ > (2p)^i φ^{1−i/(2p)}, any i
    std::size_t direction_violations = 0;  // |D^iφ[u,…,u]| > ‖D^iφ‖ at sampled unit u
    double max_log_ratio = -1e308;         // max_i,x log(‖D^iφ‖ / bound)
    std::size_t fd_points = 0;
    double max_fd_relative_error = 0.0;    // central-difference gradient vs closed form
    bool passed(double fd_tolerance = 1e-5) const {
        return violations == 0 && direction_violations == 0 && max_fd_relative_error <= fd_tolerance;
    }
};

DerivativeCheckReport derivative_bound_check(const LyapunovSpec& spec, const SamplingConfig& config,
                                             std::size_t fd_samples = 1000);

struct GeneratorCheckReport {
    std::size_t points = 0;
    std::size_t hypothesis_violations = 0;  // ⟨μ,x⟩ + ½(2p−1)‖σ‖² > cφ^{1/p}
    std::size_t conclusion_violations = 0;  // Dφ(μ) + ½Σ_k D²φ(σ_k,σ_k) > 2cpφ (checked where the hypothesis holds)
    double max_hypothesis_slack = -1e308;   // max of (lhs − rhs)/rhs
    bool passed() const { return hypothesis_violations == 0 && conclusion_violations == 0; }
};

GeneratorCheckReport generator_check(const Problem& problem, const LyapunovSpec& spec, double declared_c,
                                     const SamplingConfig& config);

struct LipschitzCheckReport {
    std::size_t samples = 0;
    std::size_t violations = 0;
    double max_ratio = 0.0;  // max |f(t,x,w₁) − f(t,x,w₂)| / |w₁ − w₂|
    bool passed() const { return violations == 0; }
};

/// Samples (t, x, w₁, w₂) and checks |f(t,x,w₁) − f(t,x,w₂)| ≤ L|w₁ − w₂|.
LipschitzCheckReport lipschitz_check(const Problem& problem, const SamplingConfig& config);

// --- path diagnostics -------------------------------------------------------------

struct PathDiagnosticConfig {
    double start_time = 0.0;
    std::vector<double> start_state;  // empty means the origin
    std::uint64_t steps = 64;         // uniform partition of [0, T]
    std::uint64_t sample_every = 8;   // record every k-th grid point
    std::size_t paths = 10000;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct MomentGrowthReport {
    std::vector<double> times;      // s values, times.front() == t
    std::vector<double> log_means;  // log of the empirical mean of φ(Y_{t,s})
    double intercept = 0.0;         // log φ(x)
    double slope = 0.0;             // ĉ, least squares through (t, log φ(x))
    double slope_stderr = 0.0;
    double ci_low = 0.0;            // 95% interval
    double ci_high = 0.0;
    std::size_t saturated = 0;      // paths with non-finite φ, excluded
    bool finite() const;
};

MomentGrowthReport moment_growth(const Problem& problem, const LyapunovSpec& spec,
                                 const PathDiagnosticConfig& config);

struct ExpMomentReport {
    double log_mean_exp = 0.0;  // log E[exp(U(Y_{t,T}) + ∫ 1_D e^{α(T−r)} Ū dr)]
    double log_rhs = 0.0;       // log η(|δ|) + U(x)e^{α(T−t)}; +inf when not representable
    bool rhs_finite = false;
    bool below_rhs = false;     // only meaningful when rhs_finite
    std::size_t saturated = 0;  // paths whose exponent is non-finite
};

/// Log-mean-exp diagnostic of the exponential-moment bound, streaming log-sum-exp.
/// Requires problem.potential; α is read from problem.constants (0 when absent).
ExpMomentReport exp_moment_diagnostic(const Problem& problem, const PathDiagnosticConfig& config);

/// Numerically stable log(mean(exp(v))) over the finite entries of v.
double log_mean_exp(std::span<const double> v);

}  // namespace tmlp
