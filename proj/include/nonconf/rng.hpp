#pragma once

#include <cstdint>

namespace nonconf {

/// SplitMix64 (Steele, Lea, Flood 2014): state += 0x9E3779B97F4A7C15 then
/// two xor-shift-multiply rounds. Fully specified, so seeded runs are
/// reproducible bit for bit on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform in [0, n).
    int below(int n) { return static_cast<int>(uniform() * n); }

private:
    std::uint64_t state_;
};

} // namespace nonconf
