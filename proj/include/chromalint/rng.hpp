#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace chromalint {

// SplitMix64, seeded directly with the user seed. Fold shuffling and the
// synthetic generator are specified against this exact bit pattern so that
// any reimplementation reproduces identical output.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 bits of mantissa.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; draws exactly two values per call so the stream position
    // does not depend on call history.
    double gaussian(double mean, double sigma) {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
        return mean + sigma * z;
    }

private:
    std::uint64_t state_;
};

// Fisher-Yates driven by SplitMix64: for i = n-1 .. 1, j = next() mod (i+1),
// swap a[i] and a[j]. The modulo draw is part of the wire contract.
template <typename T>
void fisher_yates_shuffle(std::vector<T>& items, std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (std::size_t i = items.size(); i-- > 1;) {
        std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
        std::swap(items[i], items[j]);
    }
}

}  // namespace chromalint
