#include "tmlp/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "tmlp/sde.hpp"

namespace tmlp {

namespace {

constexpr std::array<std::pair<BenchmarkId, std::string_view>, 5> kNames{{
    {BenchmarkId::LotkaVolterra, "lotka-volterra"},
    {BenchmarkId::GinzburgLandau, "ginzburg-landau"},
    {BenchmarkId::HeatOracle, "heat-oracle"},
    {BenchmarkId::OuOracle, "ou-oracle"},
    {BenchmarkId::ConstantSource, "constant-source"},
}};

void check_common(std::size_t d, double horizon) {
    if (d < 1) throw ConfigError("benchmark dimension must be >= 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("benchmark horizon must be positive");
}

MatrixField identity_diffusion(std::size_t d) {
    return [d](std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < d; ++i) out[i * d + i] = 1.0;
    };
}

Problem brownian_base(std::string name, std::size_t d, double horizon) {
    check_common(d, horizon);
    Problem p;
    p.name = std::move(name);
    p.dim = d;
    p.brownian_dim = d;
    p.horizon = horizon;
    p.drift = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
    p.diffusion = identity_diffusion(d);
    p.nonlinearity = [](double, std::span<const double>, double) { return 0.0; };
    p.terminal = [](std::span<const double> x) { return squared_norm(x); };
    p.taming_set = everywhere_taming_set();
    return p;
}

TamingSet make_taming(TamingChoice choice, double eta, double beta) {
    return choice == TamingChoice::LogMesh ? log_mesh_taming_set(eta, beta) : everywhere_taming_set();
}

}  // namespace

std::string_view benchmark_name(BenchmarkId id) {
    for (const auto& [key, name] : kNames)
        if (key == id) return name;
    return "unknown";
}

BenchmarkId parse_benchmark(std::string_view name) {
    for (const auto& [key, label] : kNames)
        if (label == name) return key;
    throw ConfigError("unknown problem '" + std::string(name) +
                      "' (expected lotka-volterra, ginzburg-landau, heat-oracle, ou-oracle, constant-source)");
}

TamingChoice parse_taming(std::string_view name) {
    if (name == "log-mesh") return TamingChoice::LogMesh;
    if (name == "everywhere") return TamingChoice::Everywhere;
    throw ConfigError("unknown taming set '" + std::string(name) + "' (expected log-mesh or everywhere)");
}

LotkaVolterraBounds lotka_volterra_bounds(std::span<const double> rates, std::span<const double> interaction,
                                          std::size_t d) {
    LotkaVolterraBounds b;
    for (double r : rates) b.r_bar = std::max(b.r_bar, r);
    for (std::size_t i = 0; i < d; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < d; ++j) row += interaction[i * d + j] * interaction[i * d + j];
        b.a_bar = std::max(b.a_bar, std::sqrt(row));
    }
    b.alpha = 2.0 * b.r_bar + 3.0;
    return b;
}

Problem lotka_volterra(std::size_t d, LotkaVolterraParams params) {
    check_common(d, params.horizon);
    if (params.rates.empty()) params.rates.assign(d, 1.0);
    if (params.interaction.empty()) params.interaction.assign(d * d, 1.0 / static_cast<double>(d));
    if (params.rates.size() != d) throw ConfigError("lotka-volterra: rates must have length d");
    if (params.interaction.size() != d * d) throw ConfigError("lotka-volterra: interaction must be d×d");
    auto negative = [](double v) { return !(v >= 0.0) || !std::isfinite(v); };
    if (std::ranges::any_of(params.rates, negative) || std::ranges::any_of(params.interaction, negative))
        throw DomainError("lotka-volterra: rates and interactions must be finite and nonnegative");

    const auto bounds = lotka_volterra_bounds(params.rates, params.interaction, d);
    const double T = params.horizon;

    Problem p;
    p.name = "lotka-volterra";
    p.dim = d;
    p.brownian_dim = d;
    p.horizon = T;
    p.drift = [d, r = params.rates, a = params.interaction](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += a[i * d + j] * std::max(0.0, x[j]);
            out[i] = r[i] * x[i] * (1.0 - s);
        }
    };
    p.diffusion = [d](std::span<const double> x, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        const double denom = 1.0 + squared_norm(x);
        for (std::size_t i = 0; i < d; ++i) out[i * d + i] = x[i] / denom;
    };
    p.nonlinearity = [](double, std::span<const double> x, double w) { return std::sin(std::sqrt(squared_norm(x)) + w); };
    p.terminal = [](std::span<const double> x) { return squared_norm(x); };
    p.taming_set = make_taming(params.taming, params.eta, params.beta);
    p.lipschitz_f = 1.0;

    const double alpha = bounds.alpha;
    const double r_bar = bounds.r_bar;
    const double a_bar = bounds.a_bar;
    p.potential = [T, alpha, r_bar, a_bar](std::span<const double> x) {
        return 8.0 * T * (8.0 * T * std::exp(alpha * T) * r_bar * r_bar * a_bar * a_bar + 3.0 + r_bar) +
               std::exp(-alpha * T) * squared_norm(x);
    };
    p.potential_rate = [](std::span<const double>) { return 0.0; };

    DeclaredConstants k;
    k.p = 16.0;
    k.beta = 2.0;
    k.gamma = 1.0;
    k.kappa = 1.0;
    k.alpha = alpha;
    k.b = T + 0.5 * (3.0 + r_bar) + (1.0 + r_bar * a_bar);
    k.c = r_bar + 7.5;
    p.constants = k;
    return p;
}

Problem ginzburg_landau(std::size_t d, double horizon, TamingChoice taming, double eta, double beta) {
    check_common(d, horizon);
    Problem p;
    p.name = "ginzburg-landau";
    p.dim = d;
    p.brownian_dim = d;
    p.horizon = horizon;
    p.drift = [](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - x[i] * x[i] * x[i];
    };
    p.diffusion = identity_diffusion(d);
    p.nonlinearity = [](double, std::span<const double>, double w) { return std::sin(w); };
    p.terminal = [](std::span<const double> x) { return squared_norm(x); };
    p.taming_set = make_taming(taming, eta, beta);
    p.lipschitz_f = 1.0;

    DeclaredConstants k;
    k.p = 2.0;
    k.c = 1.5;
    k.b = 2.0;
    k.beta = beta;
    k.kappa = 1.0;
    k.alpha = 0.0;
    k.gamma = 1.0;
    p.constants = k;
    return p;
}

Problem heat_oracle(std::size_t d, double horizon) {
    Problem p = brownian_base("heat-oracle", d, horizon);
    const double dd = static_cast<double>(d);
    p.reference = [dd, horizon](double t, std::span<const double> x) {
        return squared_norm(x) + dd * (horizon - t);
    };
    return p;
}

Problem ou_oracle(std::size_t d, double horizon, double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError("ou-oracle: theta must be positive");
    Problem p = brownian_base("ou-oracle", d, horizon);
    p.drift = [theta](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = -theta * x[i];
    };
    const double dd = static_cast<double>(d);
    p.reference = [dd, horizon, theta](double t, std::span<const double> x) {
        const double decay = std::exp(-2.0 * theta * (horizon - t));
        return squared_norm(x) * decay + dd * (1.0 - decay) / (2.0 * theta);
    };
    // X ← e^{−θh}X + I with I = ∫ e^{−θ(h−r)} dW_r, jointly Gaussian with dW:
    // Var I = (1 − e^{−2θh})/(2θ), Cov(dW, I) = (1 − e^{−θh})/θ.
    p.exact_step = [theta](std::span<double> x, double h, std::span<const double> dW, std::span<const double> aux) {
        const double decay = std::exp(-theta * h);
        const double var_i = -std::expm1(-2.0 * theta * h) / (2.0 * theta);
        const double cov = -std::expm1(-theta * h) / theta;
        const double slope = cov / h;
        const double resid = std::sqrt(std::max(0.0, var_i - cov * cov / h));
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = decay * x[i] + slope * dW[i] + resid * aux[i];
    };
    return p;
}

Problem constant_source(std::size_t d, double horizon) {
    Problem p = brownian_base("constant-source", d, horizon);
    p.nonlinearity = [](double, std::span<const double>, double) { return 1.0; };
    p.terminal = [](std::span<const double>) { return 0.0; };
    p.reference = [horizon](double t, std::span<const double>) { return horizon - t; };
    return p;
}

Problem make_benchmark(BenchmarkId id, const BenchmarkOptions& o) {
    switch (id) {
        case BenchmarkId::LotkaVolterra: {
            LotkaVolterraParams params;
            params.horizon = o.horizon;
            if (o.taming) params.taming = *o.taming;
            return lotka_volterra(o.dim, params);
        }
        case BenchmarkId::GinzburgLandau:
            return ginzburg_landau(o.dim, o.horizon, o.taming.value_or(TamingChoice::Everywhere));
        case BenchmarkId::HeatOracle: {
            Problem p = heat_oracle(o.dim, o.horizon);
            if (o.taming) p.taming_set = make_taming(*o.taming, 1.0, 1.0);
            return p;
        }
        case BenchmarkId::OuOracle: {
            Problem p = ou_oracle(o.dim, o.horizon, o.theta);
            if (o.taming) p.taming_set = make_taming(*o.taming, 1.0, 1.0);
            return p;
        }
        case BenchmarkId::ConstantSource:
            return constant_source(o.dim, o.horizon);
    }
    throw ConfigError("unknown benchmark id");
}

}  // namespace tmlp
