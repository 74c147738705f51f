#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tmlp/core.hpp"

namespace tmlp {

/// Separates the uniform-time family from the Brownian family, and both from
/// experiment-level sampling. Values are part of the hash input; never renumber.
enum class Purpose : std::uint8_t {
    BrownianIncrement = 1,
    UniformTime = 2,
    Replicate = 3,
};

struct StreamKey {
    std::uint64_t seed = 0;
    MultiIndex index;
    Purpose purpose = Purpose::BrownianIncrement;
    std::uint64_t counter = 0;
};

/// 128-bit state of one counter-based generator. Output lane j is a pure
/// function of (state, j).
struct GeneratorState {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;

    std::uint64_t bits(std::uint64_t lane) const;
    /// Uniform on [0,1) with 53 random bits.
    double uniform(std::uint64_t lane) const;
    /// Standard normal by inverse CDF of a uniform on the open interval (0,1).
    double normal(std::uint64_t lane) const;

    friend bool operator==(const GeneratorState&, const GeneratorState&) = default;
};

/// Hash of (seed, index, purpose) with the counter not yet absorbed. Computing it
/// once per path and then calling `at(counter)` per step avoids rehashing the index.
struct StreamBase {
    GeneratorState prefix;

    GeneratorState at(std::uint64_t counter) const;
};

StreamBase stream_base(std::uint64_t seed, const MultiIndex& index, Purpose purpose);
GeneratorState derive_state(const StreamKey& key);

/// m independent N(0, dt) components. Throws DomainError when dt <= 0.
std::vector<double> gaussian_increment(const StreamKey& key, double dt, std::size_t m);
/// Allocation-free form writing into `out` (length m).
void gaussian_increment(const GeneratorState& state, double dt, std::span<double> out);

double uniform01(const StreamKey& key);

/// Standard normal quantile (Wichura's AS241, relative accuracy about 1e-16).
double normal_quantile(double p);

}  // namespace tmlp
