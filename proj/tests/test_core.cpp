#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tmlp/core.hpp"
#include "tmlp/problems.hpp"

using namespace tmlp;

namespace {
std::vector<double> pts(std::initializer_list<double> v) { return v; }
}  // namespace

TEST(RoundDown, StartPointMapsToItself) {
    const auto p = Partition::from_points(pts({0.0, 0.5, 1.0}));
    EXPECT_EQ(round_down(0.0, p), 0.0);
}

TEST(RoundDown, GridPointMapsToPredecessor) {
    const auto p = Partition::from_points(pts({0.0, 0.5, 1.0}));
    EXPECT_EQ(round_down(0.5, p), 0.0);
    EXPECT_EQ(round_down(1.0, p), 0.5);
}

TEST(RoundDown, InteriorPoint) {
    const auto p = Partition::from_points(pts({0.0, 0.5, 1.0}));
    EXPECT_EQ(round_down(0.75, p), 0.5);
    EXPECT_EQ(round_down(0.25, p), 0.0);
}

TEST(RoundDown, OutsideIntervalThrows) {
    const auto p = Partition::from_points(pts({0.0, 0.5, 1.0}));
    EXPECT_THROW(round_down(-0.1, p), DomainError);
    EXPECT_THROW(round_down(1.1, p), DomainError);
}

TEST(RoundDown, UniformGridIsArithmeticAndAgreesWithExplicit) {
    const auto u = Partition::uniform(27, 3.0);
    const auto e = Partition::from_points(u.points());
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> dist(0.0, 3.0);
    for (int k = 0; k < 2000; ++k) {
        const double s = dist(gen);
        EXPECT_EQ(round_down(s, u), round_down(s, e)) << s;
    }
    for (std::size_t i = 1; i < u.size(); ++i) EXPECT_EQ(round_down(u.point(i), u), u.point(i - 1));
}

TEST(RoundDown, PropertyMonotoneAndBelow) {
    const auto p = Partition::uniform(16, 1.0).adjoin(0.37);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> dist(0.37, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const double s = dist(gen);
        const double r = round_down(s, p);
        EXPECT_LT(r, s);
        EXPECT_LE(round_down(r, p), r);
    }
}

TEST(Mesh, Examples) {
    EXPECT_EQ(mesh(Partition::from_points(pts({0.0, 1.0}))), 1.0);
    EXPECT_EQ(mesh(Partition::from_points(pts({0.0, 0.25, 1.0}))), 0.75);
    EXPECT_EQ(mesh(uniform_partition(2, 1.0)), 0.25);
}

TEST(Partition, RejectsInvalidPoints) {
    EXPECT_THROW(Partition::from_points(pts({0.0})), DomainError);
    EXPECT_THROW(Partition::from_points(pts({0.0, 0.5, 0.5})), DomainError);
    EXPECT_THROW(Partition::from_points(pts({0.0, NAN})), DomainError);
}

TEST(UniformPartition, Examples) {
    EXPECT_EQ(uniform_partition(1, 1.0).points(), pts({0.0, 1.0}));
    EXPECT_EQ(uniform_partition(2, 1.0).points(), pts({0.0, 0.25, 0.5, 0.75, 1.0}));
    const auto p3 = uniform_partition(3, 3.0);
    ASSERT_EQ(p3.size(), 28u);
    for (std::size_t i = 0; i < p3.size(); ++i) EXPECT_NEAR(p3.point(i), 3.0 * static_cast<double>(i) / 27.0, 1e-15);
    EXPECT_EQ(p3.back(), 3.0);
}

TEST(UniformPartition, MeshWithinOneRounding) {
    for (unsigned n = 1; n <= 8; ++n) {
        const double expected = 1.7 / std::pow(static_cast<double>(n), static_cast<double>(n));
        EXPECT_LE(std::fabs(uniform_partition(n, 1.7).mesh() - expected), std::nextafter(expected, 1e9) - expected);
    }
}

TEST(UniformPartition, CapacityError) {
    EXPECT_THROW(uniform_partition(10, 1.0), CapacityError);  // 10^10 > 2^31
    EXPECT_NO_THROW(uniform_partition(9, 1.0));                  // 9^9 < 2^31
    EXPECT_NO_THROW(uniform_partition(10, 1.0, std::uint64_t{1} << 34));
    EXPECT_THROW(uniform_partition(30, 1.0, ~std::uint64_t{0}), CapacityError);  // 30^30 overflows
}

TEST(UniformPartition, LargeGridIsConstantMemory) {
    const auto p = uniform_partition(8, 1.0);  // 16.7M intervals
    EXPECT_EQ(p.intervals(), 16'777'216u);
    EXPECT_EQ(round_down(0.5, p), p.point(8'388'607));
}

TEST(Adjoin, Examples) {
    const auto p = Partition::from_points(pts({0.0, 0.5, 1.0}));
    EXPECT_EQ(p.adjoin(0.0).points(), pts({0.0, 0.5, 1.0}));
    EXPECT_EQ(p.adjoin(0.3).points(), pts({0.3, 0.5, 1.0}));
    EXPECT_EQ(Partition::from_points(pts({0.0, 1.0})).adjoin(0.9).points(), pts({0.9, 1.0}));
    EXPECT_EQ(adjoin(p, 0.5).points(), pts({0.5, 1.0}));
}

TEST(Adjoin, TerminalTimeThrows) {
    const auto p = Partition::from_points(pts({0.0, 0.5, 1.0}));
    EXPECT_THROW(p.adjoin(1.0), DomainError);
    EXPECT_THROW(p.adjoin(-0.5), DomainError);
}

TEST(Adjoin, PropertyMeshNeverGrows) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> gap(0.01, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v{0.0};
        for (int i = 0; i < 12; ++i) v.push_back(v.back() + gap(gen));
        const auto p = Partition::from_points(v);
        std::uniform_real_distribution<double> at(0.0, v.back());
        const double t = at(gen);
        const auto a = p.adjoin(t);
        EXPECT_LE(a.mesh(), p.mesh());
        const auto expected = [&] {
            std::vector<double> w{t};
            for (double x : v)
                if (x > t) w.push_back(x);
            return w;
        }();
        EXPECT_EQ(a.points(), expected);
        double m = 0.0;
        for (std::size_t i = 1; i < expected.size(); ++i) m = std::max(m, expected[i] - expected[i - 1]);
        EXPECT_EQ(a.mesh(), m);
    }
    const auto u = Partition::uniform(10, 1.0);
    for (double t : {0.0, 0.05, 0.1, 0.55, 0.95, 0.999}) EXPECT_LE(u.adjoin(t).mesh(), u.mesh());
}

TEST(Adjoin, UniformMatchesExplicit) {
    const auto u = Partition::uniform(64, 1.0);
    const auto e = Partition::from_points(u.points());
    for (double t : {0.0, 0.015625, 0.3, 0.73, 0.99}) {
        EXPECT_EQ(u.adjoin(t).points(), e.adjoin(t).points()) << t;
        EXPECT_EQ(u.adjoin(t).mesh(), e.adjoin(t).mesh()) << t;
    }
}

TEST(MultiIndex, RootAndChildren) {
    const MultiIndex root;
    EXPECT_EQ(root, MultiIndex{0});
    EXPECT_EQ(root.child(2, 5), (MultiIndex{0, 2, 5}));
    EXPECT_EQ(root.child(-2, 5), (MultiIndex{0, -2, 5}));
    EXPECT_EQ(root.child(0, -3), (MultiIndex{0, 0, -3}));
    EXPECT_NE(root.child(2, 5), root.child(-2, 5));
    EXPECT_EQ(MultiIndex::replicate_root(7), (MultiIndex{7, 0}));
    EXPECT_EQ(root.child(1, 2).to_string(), "(0,1,2)");
    EXPECT_THROW(MultiIndex(std::vector<std::int64_t>{}), DomainError);
}

TEST(CostLedger, TotalAndMerge) {
    CostLedger a{1, 2, 3, 3, 3};
    const CostLedger b{4, 5, 6, 6, 6};
    EXPECT_EQ(a.total(), 1u + 2u + 3u);
    a += b;
    EXPECT_EQ(a, (CostLedger{5, 7, 9, 9, 9}));
}

TEST(Problem, ValidateRejectsBadSetup) {
    Problem p = heat_oracle(3);
    EXPECT_NO_THROW(p.validate());
    p.horizon = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = heat_oracle(3);
    p.lipschitz_f = -1.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = heat_oracle(3);
    p.drift = nullptr;
    EXPECT_THROW(p.validate(), ConfigError);
}
