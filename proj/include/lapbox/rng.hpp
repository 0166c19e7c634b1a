#pragma once

#include <cstdint>
#include <cmath>

#include "lapbox/common.hpp"

namespace lapbox {

// Deterministic random numbers with explicit streams. The envelope promises
// bit-identical reruns for a fixed seed across platforms, so we do not use
// std::mt19937 + std::*_distribution (the distributions are not pinned by the
// standard). splitmix64 seeds an xoshiro256** core and both are exact integer
// algorithms; uniform and normal draws are derived from them arithmetically.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
        have_cached_normal_ = false;
        cached_normal_ = 0.0;
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t x, int k) {
            return (x << k) | (x >> (64 - k));
        };
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0,1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; the log argument is bounded away from 0 by the half-ulp shift.
    double normal() {
        if (have_cached_normal_) {
            have_cached_normal_ = false;
            return cached_normal_;
        }
        double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
        double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * pi * u2;
        cached_normal_ = r * std::sin(a);
        have_cached_normal_ = true;
        return r * std::cos(a);
    }

    cplx complex_normal() {
        double re = normal();
        double im = normal();
        return {re, im};
    }

private:
    std::uint64_t s_[4];
    bool have_cached_normal_;
    double cached_normal_;
};

// Master seed plus a stream index derive independent substreams, so scenario
// pieces can draw without coupling their sequences.
struct SeedStream {
    std::uint64_t master = 0;

    std::uint64_t stream(std::uint64_t index) const {
        std::uint64_t st = master ^ (0x632be59bd9b4e019ULL * (index + 1));
        return splitmix64(st);
    }

    Rng rng(std::uint64_t index) const { return Rng(stream(index)); }
};

}  // namespace lapbox
