#pragma once

// Deterministic random number generation. Every Monte Carlo replication is
// keyed by (seed, stream_id); identical keys give bit-identical streams and
// distinct stream ids give statistically independent ones, which is the
// parallelization axis for the experiment harness.

#include <array>
#include <cmath>
#include <cstdint>

namespace fracdrift {

struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    RngSeed with_stream(std::uint64_t s) const { return {seed, s}; }
    RngSeed offset(std::uint64_t k) const { return {seed, stream_id + k}; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// xoshiro256++ seeded through splitmix64 over (seed, stream_id).
class Rng {
  public:
    explicit Rng(RngSeed key) {
        std::uint64_t s = key.seed;
        (void)detail::splitmix64(s);
        s ^= key.stream_id * 0xD1342543DE82EF95ULL;
        for (auto& word : state_) word = detail::splitmix64(s);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 0x9E3779B97F4A7C15ULL;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }

    /// Standard normal via the Box-Muller transform (pairs cached).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - next_uniform();  // in (0, 1]
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.2831853071795864769 * u2;
        spare_ = r * std::sin(angle);
        have_spare_ = true;
        return r * std::cos(angle);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// FNV-1a over a string, used to derive per-subcommand stream bases.
inline std::uint64_t fnv1a64(const char* s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (; *s; ++s) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*s));
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace fracdrift
