#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tmlp/problems.hpp"

using namespace tmlp;

namespace {

std::vector<double> drift(const Problem& p, std::span<const double> x) {
    std::vector<double> out(p.dim);
    p.drift(x, out);
    return out;
}

std::vector<double> diffusion(const Problem& p, std::span<const double> x) {
    std::vector<double> out(p.dim * p.brownian_dim);
    p.diffusion(x, out);
    return out;
}

double frobenius2(std::span<const double> m) {
    double s = 0.0;
    for (double v : m) s += v * v;
    return s;
}

}  // namespace

TEST(Benchmarks, NamesRoundTrip) {
    for (auto id : {BenchmarkId::LotkaVolterra, BenchmarkId::GinzburgLandau, BenchmarkId::HeatOracle,
                    BenchmarkId::OuOracle, BenchmarkId::ConstantSource})
        EXPECT_EQ(parse_benchmark(benchmark_name(id)), id);
    EXPECT_THROW(parse_benchmark("heat"), ConfigError);
    EXPECT_EQ(parse_taming("log-mesh"), TamingChoice::LogMesh);
    EXPECT_EQ(parse_taming("everywhere"), TamingChoice::Everywhere);
    EXPECT_THROW(parse_taming("never"), ConfigError);
}

TEST(Benchmarks, AllValidate) {
    for (auto id : {BenchmarkId::LotkaVolterra, BenchmarkId::GinzburgLandau, BenchmarkId::HeatOracle,
                    BenchmarkId::OuOracle, BenchmarkId::ConstantSource}) {
        const Problem p = make_benchmark(id, {.dim = 4});
        EXPECT_NO_THROW(p.validate()) << p.name;
        EXPECT_EQ(p.dim, 4u);
    }
    EXPECT_THROW(heat_oracle(0), ConfigError);
    EXPECT_THROW(ou_oracle(2, 1.0, 0.0), ConfigError);
    EXPECT_THROW(ginzburg_landau(2, -1.0), ConfigError);
}

TEST(LotkaVolterra, OneDimensionalExample) {
    const Problem p = lotka_volterra(1);
    const std::vector<double> x{2.0};
    EXPECT_DOUBLE_EQ(drift(p, x)[0], -2.0);
    EXPECT_DOUBLE_EQ(diffusion(p, x)[0], 0.4);
    const std::vector<double> origin{0.0};
    EXPECT_EQ(drift(p, origin)[0], 0.0);
    EXPECT_EQ(diffusion(p, origin)[0], 0.0);
    EXPECT_DOUBLE_EQ(p.nonlinearity(0.0, x, 1.0), std::sin(3.0));
    EXPECT_DOUBLE_EQ(p.terminal(x), 4.0);
}

TEST(LotkaVolterra, RejectsNegativeParameters) {
    EXPECT_THROW(lotka_volterra(2, {.rates = {1.0, -1.0}}), DomainError);
    EXPECT_THROW(lotka_volterra(2, {.interaction = {1.0, 0.0, -0.5, 1.0}}), DomainError);
    EXPECT_THROW(lotka_volterra(2, {.rates = {1.0}}), ConfigError);
}

TEST(LotkaVolterra, BoundsAndConstants) {
    const auto b = lotka_volterra_bounds(std::vector<double>{1.0, 3.0}, std::vector<double>{3.0, 4.0, 0.0, 1.0}, 2);
    EXPECT_EQ(b.r_bar, 3.0);
    EXPECT_EQ(b.a_bar, 5.0);
    EXPECT_EQ(b.alpha, 9.0);
    const Problem p = lotka_volterra(10);
    ASSERT_TRUE(p.constants.has_value());
    EXPECT_EQ(p.constants->alpha, 5.0);
    EXPECT_EQ(p.constants->c, 8.5);
    EXPECT_EQ(p.constants->p, 16.0);
    EXPECT_EQ(p.lipschitz_f, 1.0);
    ASSERT_TRUE(p.potential);
    // U(0) = 8T(8Te^{αT}r̄²ā² + 3 + r̄) with r̄ = 1, ā = (10·0.01)^{1/2}.
    const double expected = 8.0 * (8.0 * std::exp(5.0) * 0.1 + 4.0);
    EXPECT_NEAR(p.potential(std::vector<double>(10, 0.0)), expected, 1e-10 * expected);
}

TEST(LotkaVolterra, DiffusionIsBoundedByAQuarter) {
    const Problem p = lotka_volterra(5);
    std::mt19937_64 gen(7);
    std::normal_distribution<double> n(0.0, 3.0);
    for (int k = 0; k < 10000; ++k) {
        std::vector<double> x(5);
        for (double& v : x) v = n(gen);
        EXPECT_LE(frobenius2(diffusion(p, x)), 0.25 + 1e-15);
    }
}

TEST(LotkaVolterra, LocallyLipschitzCoefficients) {
    // ‖μ(x) − μ(y)‖ + ‖σ(x) − σ(y)‖ ≤ C(1 + ‖x‖ + ‖y‖)^2 ‖x − y‖ with a C depending
    // on r̄, ā and d only.
    const std::size_t d = 4;
    const Problem p = lotka_volterra(d);
    const double C = 4.0 * std::sqrt(static_cast<double>(d));
    std::mt19937_64 gen(8);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int k = 0; k < 10000; ++k) {
        std::vector<double> x(d), y(d), diff(d);
        for (std::size_t i = 0; i < d; ++i) {
            x[i] = n(gen);
            y[i] = x[i] + 0.1 * n(gen);
            diff[i] = x[i] - y[i];
        }
        const auto mx = drift(p, x), my = drift(p, y);
        const auto sx = diffusion(p, x), sy = diffusion(p, y);
        double dm = 0.0, ds = 0.0;
        for (std::size_t i = 0; i < d; ++i) dm += (mx[i] - my[i]) * (mx[i] - my[i]);
        for (std::size_t i = 0; i < d * d; ++i) ds += (sx[i] - sy[i]) * (sx[i] - sy[i]);
        const double growth = 1.0 + std::sqrt(squared_norm(x)) + std::sqrt(squared_norm(y));
        EXPECT_LE(std::sqrt(dm) + std::sqrt(ds), C * growth * growth * std::sqrt(squared_norm(diff)));
    }
}

TEST(GinzburgLandau, ExamplesAndOneSidedLipschitz) {
    const Problem p = ginzburg_landau(3);
    EXPECT_EQ(drift(p, std::vector<double>{1.0, 0.0, 0.0}), (std::vector<double>{0.0, 0.0, 0.0}));
    EXPECT_DOUBLE_EQ(drift(p, std::vector<double>{2.0, -1.0, 0.5})[0], -6.0);
    // ⟨x − y, μ(x) − μ(y)⟩ ≤ ‖x − y‖²
    std::mt19937_64 gen(9);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int k = 0; k < 10000; ++k) {
        std::vector<double> x(3), y(3);
        for (std::size_t i = 0; i < 3; ++i) {
            x[i] = n(gen);
            y[i] = n(gen);
        }
        const auto mx = drift(p, x), my = drift(p, y);
        double inner = 0.0, dist2 = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            inner += (x[i] - y[i]) * (mx[i] - my[i]);
            dist2 += (x[i] - y[i]) * (x[i] - y[i]);
        }
        EXPECT_LE(inner, dist2 * (1.0 + 1e-12));
    }
}

TEST(Oracles, ReferenceValues) {
    EXPECT_EQ(heat_oracle(10).reference(0.0, std::vector<double>(10, 0.0)), 10.0);
    const double ou = ou_oracle(5).reference(0.0, std::vector<double>(5, 0.0));
    EXPECT_NEAR(ou, 2.5 * (1.0 - std::exp(-2.0)), 1e-15);
    EXPECT_NEAR(ou, 2.1617, 5e-5);
    EXPECT_EQ(constant_source(3, 2.0).reference(0.5, std::vector<double>(3, 1.0)), 1.5);
    EXPECT_EQ(ou_oracle(2).reference(1.0, std::vector<double>{1.0, 2.0}), 5.0);
}

TEST(Oracles, SatisfyTheBackwardEquation) {
    // ∂_t u + ⟨μ, ∇u⟩ + ½Δu + f = 0, checked with central differences.
    for (const Problem& p : {heat_oracle(3), ou_oracle(3, 1.0, 0.7), constant_source(3)}) {
        std::mt19937_64 gen(11);
        std::normal_distribution<double> n(0.0, 1.0);
        std::uniform_real_distribution<double> time(0.05, 0.95);
        for (int k = 0; k < 200; ++k) {
            std::vector<double> x(3);
            for (double& v : x) v = n(gen);
            const double t = time(gen), h = 1e-4;
            const double u0 = p.reference(t, x);
            const double ut = (p.reference(t + h, x) - p.reference(t - h, x)) / (2.0 * h);
            const auto mu = drift(p, x);
            double transport = 0.0, laplacian = 0.0;
            for (std::size_t i = 0; i < 3; ++i) {
                auto xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                const double up = p.reference(t, xp), um = p.reference(t, xm);
                transport += mu[i] * (up - um) / (2.0 * h);
                laplacian += (up - 2.0 * u0 + um) / (h * h);
            }
            const double residual = ut + transport + 0.5 * laplacian + p.nonlinearity(t, x, u0);
            EXPECT_LE(std::fabs(residual), 1e-4) << p.name;
        }
        const std::vector<double> x{0.3, -0.2, 1.1};
        EXPECT_NEAR(p.reference(p.horizon, x), p.terminal(x), 1e-14) << p.name;
    }
}

TEST(Oracles, OuExactStepMoments) {
    // One exact step from x with (dW, aux) standard: mean e^{−θh}x, variance (1 − e^{−2θh})/(2θ).
    const Problem p = ou_oracle(1, 1.0, 2.0);
    const double h = 0.3;
    std::mt19937_64 gen(12);
    std::normal_distribution<double> n(0.0, 1.0);
    double s = 0.0, s2 = 0.0, cov = 0.0;
    const int N = 200000;
    for (int k = 0; k < N; ++k) {
        std::vector<double> x{1.0};
        const std::vector<double> dW{std::sqrt(h) * n(gen)}, aux{n(gen)};
        p.exact_step(x, h, dW, aux);
        s += x[0];
        s2 += x[0] * x[0];
        cov += x[0] * dW[0];
    }
    const double mean = s / N, var = s2 / N - mean * mean;
    EXPECT_NEAR(mean, std::exp(-0.6), 4.0 * std::sqrt(var / N));
    EXPECT_NEAR(var, (1.0 - std::exp(-1.2)) / 4.0, 0.01 * var);
    EXPECT_NEAR(cov / N, (1.0 - std::exp(-0.6)) / 2.0, 0.01);
}

TEST(Benchmarks, NonlinearitiesAreLipschitzInW) {
    std::mt19937_64 gen(13);
    std::normal_distribution<double> n(0.0, 5.0);
    for (const Problem& p : {lotka_volterra(3), ginzburg_landau(3), heat_oracle(3), ou_oracle(3), constant_source(3)}) {
        for (int k = 0; k < 10000; ++k) {
            std::vector<double> x(3);
            for (double& v : x) v = n(gen);
            const double w1 = n(gen), w2 = n(gen), t = 0.5;
            EXPECT_LE(std::fabs(p.nonlinearity(t, x, w1) - p.nonlinearity(t, x, w2)),
                      p.lipschitz_f * std::fabs(w1 - w2) + 1e-14)
                << p.name;
        }
    }
}
