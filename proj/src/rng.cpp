#include "tmlp/rng.hpp"

#include <bit>
#include <cmath>

namespace tmlp {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kLaneB = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kLaneC = 0xC2B2AE3D27D4EB4FULL;

// MurmurHash3 64-bit finalizer.
constexpr std::uint64_t fmix64(std::uint64_t k) {
    k ^= k >> 33;
    k *= 0xFF51AFD7ED558CCDULL;
    k ^= k >> 33;
    k *= 0xC4CEB9FE1A85EC53ULL;
    k ^= k >> 33;
    return k;
}

constexpr void absorb(GeneratorState& s, std::uint64_t word) {
    const std::uint64_t lo = fmix64(s.lo ^ (word * kGolden));
    const std::uint64_t hi = fmix64((s.hi + word + kLaneB) ^ std::rotl(lo, 23));
    s.lo = lo;
    s.hi = hi;
}

}  // namespace

std::uint64_t GeneratorState::bits(std::uint64_t lane) const {
    const std::uint64_t a = fmix64(lo + (lane + 1) * kGolden);
    const std::uint64_t b = fmix64(hi ^ (lane * kLaneC + kLaneB));
    return fmix64(a ^ std::rotl(b, 31));
}

double GeneratorState::uniform(std::uint64_t lane) const {
    return static_cast<double>(bits(lane) >> 11) * 0x1.0p-53;
}

double GeneratorState::normal(std::uint64_t lane) const {
    const double u = (static_cast<double>(bits(lane) >> 11) + 0.5) * 0x1.0p-53;
    return normal_quantile(u);
}

GeneratorState StreamBase::at(std::uint64_t counter) const {
    GeneratorState s = prefix;
    absorb(s, counter);
    return s;
}

StreamBase stream_base(std::uint64_t seed, const MultiIndex& index, Purpose purpose) {
    GeneratorState s{0x6A09E667F3BCC908ULL, 0xBB67AE8584CAA73BULL};
    absorb(s, seed);
    absorb(s, static_cast<std::uint64_t>(purpose));
    // Length prefix keeps (θ) and (θ, 0) style prefixes apart.
    absorb(s, static_cast<std::uint64_t>(index.size()));
    for (std::int64_t e : index.entries()) absorb(s, static_cast<std::uint64_t>(e));
    return StreamBase{s};
}

GeneratorState derive_state(const StreamKey& key) {
    return stream_base(key.seed, key.index, key.purpose).at(key.counter);
}

void gaussian_increment(const GeneratorState& state, double dt, std::span<double> out) {
    if (!(dt > 0.0)) throw DomainError("gaussian_increment: dt must be positive");
    const double scale = std::sqrt(dt);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = scale * state.normal(k);
}

std::vector<double> gaussian_increment(const StreamKey& key, double dt, std::size_t m) {
    std::vector<double> out(m);
    gaussian_increment(derive_state(key), dt, out);
    return out;
}

double uniform01(const StreamKey& key) { return derive_state(key).uniform(0); }

double normal_quantile(double p) {
    // Wichura, Algorithm AS241 (PPND16).
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                  3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

}  // namespace tmlp
