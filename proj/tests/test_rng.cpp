#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "tmlp/rng.hpp"

using namespace tmlp;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

constexpr std::size_t kDraws = 100000;

}  // namespace

TEST(DeriveState, PureFunction) {
    const StreamKey key{42, MultiIndex{0, 3, -1}, Purpose::BrownianIncrement, 9};
    EXPECT_EQ(derive_state(key), derive_state(key));
    EXPECT_EQ(derive_state(key), stream_base(42, key.index, key.purpose).at(9));
}

TEST(DeriveState, DistinctKeysGiveDistinctStates) {
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    const std::vector<MultiIndex> indices{MultiIndex{0},       MultiIndex{0, 0},     MultiIndex{0, 1, 1},
                                          MultiIndex{0, -1, 1}, MultiIndex{0, 1, -1}, MultiIndex{0, 0, -1},
                                          MultiIndex{1, 0},     MultiIndex{0, 1}};
    for (std::uint64_t seed : {0u, 1u}) {
        for (const auto& idx : indices) {
            for (auto purpose : {Purpose::BrownianIncrement, Purpose::UniformTime, Purpose::Replicate}) {
                for (std::uint64_t c = 0; c < 4; ++c) {
                    const auto s = derive_state({seed, idx, purpose, c});
                    EXPECT_TRUE(seen.emplace(s.lo, s.hi).second) << idx.to_string();
                }
            }
        }
    }
}

TEST(DeriveState, PurposeStreamsUncorrelated) {
    std::vector<double> a(kDraws), b(kDraws);
    for (std::size_t i = 0; i < kDraws; ++i) {
        const MultiIndex idx{0, static_cast<std::int64_t>(i)};
        a[i] = derive_state({5, idx, Purpose::BrownianIncrement, 0}).uniform(0);
        b[i] = derive_state({5, idx, Purpose::UniformTime, 0}).uniform(0);
    }
    EXPECT_LT(std::fabs(correlation(a, b)), 0.02);
}

TEST(GaussianIncrement, MeanAndVariance) {
    const double dt = 0.3;
    const std::size_t m = 3;
    std::vector<double> sum(m, 0.0), sq(m, 0.0);
    for (std::size_t i = 0; i < kDraws; ++i) {
        const auto z = gaussian_increment({1, MultiIndex{0}, Purpose::BrownianIncrement, i}, dt, m);
        for (std::size_t k = 0; k < m; ++k) {
            sum[k] += z[k];
            sq[k] += z[k] * z[k];
        }
    }
    const double n = static_cast<double>(kDraws);
    for (std::size_t k = 0; k < m; ++k) {
        const double mean = sum[k] / n;
        EXPECT_LT(std::fabs(mean), 4.0 * std::sqrt(dt / n));
        const double var = sq[k] / n - mean * mean;
        EXPECT_LT(std::fabs(var - dt), 0.1 * dt);
    }
}

TEST(GaussianIncrement, CountersUncorrelated) {
    std::vector<double> a(kDraws), b(kDraws);
    for (std::size_t i = 0; i < kDraws; ++i) {
        const MultiIndex idx{static_cast<std::int64_t>(i)};
        a[i] = gaussian_increment({2, idx, Purpose::BrownianIncrement, 0}, 1.0, 1)[0];
        b[i] = gaussian_increment({2, idx, Purpose::BrownianIncrement, 1}, 1.0, 1)[0];
    }
    EXPECT_LT(std::fabs(correlation(a, b)), 0.02);
}

TEST(GaussianIncrement, LanesUncorrelated) {
    std::vector<double> a(kDraws), b(kDraws);
    for (std::size_t i = 0; i < kDraws; ++i) {
        const auto z = gaussian_increment({3, MultiIndex{0}, Purpose::BrownianIncrement, i}, 1.0, 2);
        a[i] = z[0];
        b[i] = z[1];
    }
    EXPECT_LT(std::fabs(correlation(a, b)), 0.02);
}

TEST(GaussianIncrement, NonPositiveDtThrows) {
    EXPECT_THROW(gaussian_increment({1, MultiIndex{0}, Purpose::BrownianIncrement, 0}, 0.0, 2), DomainError);
    EXPECT_THROW(gaussian_increment({1, MultiIndex{0}, Purpose::BrownianIncrement, 0}, -1.0, 2), DomainError);
}

TEST(Uniform01, RangeMeanDeterminism) {
    double sum = 0.0;
    for (std::size_t i = 0; i < kDraws; ++i) {
        const StreamKey key{4, MultiIndex{0, static_cast<std::int64_t>(i)}, Purpose::UniformTime, 0};
        const double u = uniform01(key);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_EQ(u, uniform01(key));
        sum += u;
    }
    EXPECT_LT(std::fabs(sum / static_cast<double>(kDraws) - 0.5), 0.01);
}

TEST(NormalQuantile, KnownValues) {
    EXPECT_DOUBLE_EQ(normal_quantile(0.5), 0.0);
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-14);
    EXPECT_NEAR(normal_quantile(0.025), -1.959963984540054, 1e-14);
    EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-12);
    EXPECT_NEAR(normal_quantile(0.8413447460685429), 1.0, 1e-13);
}
