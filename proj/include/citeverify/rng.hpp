#pragma once

#include <cstdint>

namespace citeverify {

// SplitMix64 generator (Steele et al., "Fast splittable pseudorandom number
// generators"). Chosen over std::mt19937 because the output sequence is fixed
// by this header alone, so bootstrap CIs are reproducible across standard
// libraries and across serial/parallel execution.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased draw in [0, n) via rejection sampling.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Independent substream for resample `index` under a common seed. Each
    // resample draws from its own stream, so the result does not depend on
    // which thread executes it.
    static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 mixer(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
        return SplitMix64(mixer.next());
    }

private:
    std::uint64_t state_;
};

} // namespace citeverify
