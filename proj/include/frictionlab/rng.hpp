#pragma once

#include <cmath>
#include <cstdint>

namespace frictionlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent 64-bit stream seed from (master, condition, replication).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t condition,
                                 std::uint64_t replication) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (condition + 0x632be59bd9b4e019ULL));
    s = splitmix64(s ^ (replication + 0x9e6c63d0876a9a47ULL));
    return s;
}

// xoshiro256++ with splitmix64 seeding. Self-contained so that streams are
// bit-reproducible across platforms and standard-library versions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& si : s_) {
            x = splitmix64(x);
            si = x;
        }
        have_gauss_ = false;
        gauss_ = 0.0;
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

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). Modulo bias is negligible for n << 2^64.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via polar Box-Muller; caches the paired deviate.
    double gauss() {
        if (have_gauss_) {
            have_gauss_ = false;
            return gauss_;
        }
        double u, v, r2;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            r2 = u * u + v * v;
        } while (r2 >= 1.0 || r2 == 0.0);
        const double f = std::sqrt(-2.0 * std::log(r2) / r2);
        gauss_ = v * f;
        have_gauss_ = true;
        return u * f;
    }

    double gauss(double mean, double stddev) { return mean + stddev * gauss(); }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    bool have_gauss_;
    double gauss_;
};

}  // namespace frictionlab
