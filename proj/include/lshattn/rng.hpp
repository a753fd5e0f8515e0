#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace lshattn {

// splitmix64 finalizer, used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Seed for substream `stream` of a master seed. Distinct stream ids give
// independent generators, so one master seed can be split across trials,
// samples, and components without the streams overlapping.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream));
}

// Seeded generator with explicit uniform/normal/bounded-int draws. The
// transforms are spelled out here so a seed pins the exact stream on a given
// build instead of depending on unspecified std::*_distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the second variate of each pair is
    // cached so array fills consume one pair per two values.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    // Unbiased integer in [0, n); rejection sampling on the raw stream.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0ull - n) % n;
        for (;;) {
            const std::uint64_t raw = gen_();
            if (raw >= threshold) return raw % n;
        }
    }

  private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline void fill_normal(Rng& rng, std::vector<double>& out) {
    for (auto& v : out) v = rng.normal();
}

}  // namespace lshattn
