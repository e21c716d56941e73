#pragma once

#include <cstdint>

namespace kmlsvd {

/// Portable 64-bit linear congruential generator,
/// state' = state * 6364136223846793005 + 1442695040888963407 (mod 2^64).
/// Used for every synthetic fixture so results reproduce across machines
/// and implementations.
class Lcg64 {
public:
    explicit Lcg64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return state_;
    }

    /// Uniform in [0, 1), 53 significant bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [-1, 1).
    double symmetric() { return 2.0 * uniform() - 1.0; }

private:
    std::uint64_t state_;
};

}  // namespace kmlsvd
