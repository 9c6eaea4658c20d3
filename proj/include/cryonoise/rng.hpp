#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cryonoise::rng {

/// SplitMix64: tiny, portable, bit-exact across platforms. Used instead of
/// <random> engines+distributions, whose normal variates are
/// implementation-defined and would break byte-identical replay.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in (0, 1].
    double uniform01() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Stream-splitting rule: sub_seed(master, stream) scrambles
/// master XOR golden_ratio * (stream + 1) through one SplitMix64 step.
/// Parallel generators over different streams are independent and the full
/// assignment is deterministic for a given master seed.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream) {
    SplitMix64 s(master ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
    return s.next();
}

/// Gaussian deviates via Box-Muller on SplitMix64 uniforms.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : u_(seed) {}

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(u_.uniform01()));
        const double phi = 2.0 * std::numbers::pi * u_.uniform01();
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    SplitMix64 u_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace cryonoise::rng
