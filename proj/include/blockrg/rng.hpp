#pragma once

#include <cstdint>

namespace blockrg {

// Counter-based SplitMix64. The generator identity is part of the external
// reproducibility contract (see README): stream(seed) emits
// u64_0, u64_1, ... and any reimplementation must match bit-exactly.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Rejection-free modulo is fine here: n is
    // tiny compared to 2^64 in every use, and the contract pins this exact
    // reduction anyway.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    int next_sign() { return (next_u64() & 1u) ? -1 : +1; }

  private:
    std::uint64_t state_;
};

// Substream derivation: fold a small tag into the seed. Documented contract:
// substream(seed, tag) = SplitMix64(seed ^ (0xD1B54A32D192ED03 * (tag + 1))).
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t tag) {
    return SplitMix64(seed ^ (0xD1B54A32D192ED03ull * (tag + 1)));
}

}  // namespace blockrg
