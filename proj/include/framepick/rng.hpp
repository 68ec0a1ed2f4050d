#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace framepick {

/// Small deterministic PRNG (splitmix64 stream) with explicit bit-level
/// uniform and Box-Muller normal mappings. Unlike <random> distributions the
/// produced sequences are identical across standard libraries, which keeps
/// synthetic corpora and test oracles reproducible everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        const double u2 = next_unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53; // guard the log
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Independent stream for a derived entity (e.g. one grid spot).
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
        Rng mixer(seed ^ (0xD1B54A32D192ED03ull * (index + 1)));
        return mixer.next_u64();
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace framepick
