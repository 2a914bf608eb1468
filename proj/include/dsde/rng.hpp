#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dsde {

// Reproducible random numbers, fully specified so outputs are identical
// across platforms and thread counts:
//   * streams: xoshiro256++ states derived by splitmix64 from
//     seed + stream_id * 0x9E3779B97F4A7C15 (stream 0 = the seed itself),
//   * uniforms: top 53 bits / 2^53,
//   * normals: Box-Muller (trigonometric form), pairs cached.
// This is the "normal sampling v1" scheme referenced by the docs; any change
// here would silently re-randomize every experiment, so don't.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    Rng() : Rng(0, 0) {}
    Rng(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t sm = seed + stream_id * 0x9E3779B97F4A7C15ULL;
        for (auto& word : s_) word = splitmix64(sm);
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0,1]; safe for log()
    double uniform_pos() { return 1.0 - uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias is < 2^-64 per draw, irrelevant at our scales
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
    bool have_spare_;
    double spare_;
};

}  // namespace dsde
