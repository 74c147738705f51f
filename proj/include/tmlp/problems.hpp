#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmlp/core.hpp"

namespace tmlp {

enum class BenchmarkId { LotkaVolterra, GinzburgLandau, HeatOracle, OuOracle, ConstantSource };

/// Kebab-case CLI name, e.g. "heat-oracle".
std::string_view benchmark_name(BenchmarkId id);
/// Inverse of benchmark_name. Throws ConfigError for unknown names.
BenchmarkId parse_benchmark(std::string_view name);

enum class TamingChoice {
    LogMesh,     // {h ≤ 0.5, d^{3η}(‖x‖² + d^η)^{8β} ≤ exp(|ln h|^{1/2})}
    Everywhere,  // D_h = ℝ^d
};

/// Parses "log-mesh" / "everywhere". Throws ConfigError otherwise.
TamingChoice parse_taming(std::string_view name);

struct LotkaVolterraParams {
    std::vector<double> rates;        // r, length d; empty means r_i = 1
    std::vector<double> interaction;  // a, row-major d×d; empty means a_ij = 1/d
    double horizon = 1.0;
    TamingChoice taming = TamingChoice::LogMesh;
    double eta = 1.0;
    double beta = 2.0;
};

/// r̄ = max_i r_i, ā = max_i (Σ_j a_ij²)^{1/2}, α = 2r̄ + 3.
struct LotkaVolterraBounds {
    double r_bar = 0.0;
    double a_bar = 0.0;
    double alpha = 0.0;
};

LotkaVolterraBounds lotka_volterra_bounds(std::span<const double> rates, std::span<const double> interaction,
                                          std::size_t d);

/// μ_i = r_i x_i (1 − Σ_j a_ij x_j⁺), σ = diag(x_i/(1+‖x‖²)), f = sin(‖x‖ + w), g = ‖x‖².
/// Attaches U(x) = 8T(8Te^{αT}r̄²ā² + 3 + r̄) + e^{−αT}‖x‖² and Ū ≡ 0.
/// Throws DomainError for negative rates or interactions.
Problem lotka_volterra(std::size_t d, LotkaVolterraParams params = {});

/// μ_i = x_i − x_i³, σ = I, f = sin(w), g = ‖x‖².
Problem ginzburg_landau(std::size_t d, double horizon = 1.0, TamingChoice taming = TamingChoice::Everywhere,
                        double eta = 1.0, double beta = 1.0);

/// μ = 0, σ = I, f = 0, g = ‖x‖²; u(t,x) = ‖x‖² + d(T − t).
Problem heat_oracle(std::size_t d, double horizon = 1.0);

/// μ = −θx, σ = I, f = 0, g = ‖x‖²; u(t,x) = ‖x‖²e^{−2θ(T−t)} + d(1 − e^{−2θ(T−t)})/(2θ).
/// Carries the exact one-step transition used for strong-error coupling.
Problem ou_oracle(std::size_t d, double horizon = 1.0, double theta = 1.0);

/// μ = 0, σ = I, f = 1, g = 0; u(t,x) = T − t.
Problem constant_source(std::size_t d, double horizon = 1.0);

struct BenchmarkOptions {
    std::size_t dim = 10;
    double horizon = 1.0;
    double theta = 1.0;                  // OU reversion rate
    std::optional<TamingChoice> taming;  // empty: the benchmark's default
};

Problem make_benchmark(BenchmarkId id, const BenchmarkOptions& options);

}  // namespace tmlp
