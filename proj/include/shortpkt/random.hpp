// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "shortpkt/common.hpp"

namespace shortpkt {

/// splitmix64 finalizer; used to derive independent per-trial seeds.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for trial `index` of stream `stream` under `master`. Independent of
/// worker assignment, so fan-out never changes results.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index)
{
    return mix64(mix64(mix64(master) ^ stream) ^ index);
}

/// Seeded generator owned by exactly one trial or worker.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

    /// Uniform integer in [lo, hi).
    int uniform_int(int lo, int hi)
    {
        return std::uniform_int_distribution<int>(lo, hi - 1)(engine_);
    }

    /// Circularly-symmetric complex Gaussian with total variance `var`.
    cplx complex_normal(double var)
    {
        const double s = std::sqrt(var / 2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    Bits bits(std::size_t count)
    {
        Bits out(count);
        for (auto& b : out)
            b = static_cast<std::uint8_t>(engine_() >> 63);
        return out;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace shortpkt
