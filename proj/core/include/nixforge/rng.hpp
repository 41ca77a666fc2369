#pragma once

#include <cstdint>

namespace nixforge {

// splitmix64: the 64-bit generator used for every seeded value the library
// produces. Chosen over std:: engines because its output sequence is pinned
// by these few lines, not by a standard library implementation.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1): top 53 bits scaled, exact in double arithmetic.
    double uniform() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return next() % n; }

private:
    uint64_t state_;
};

// Standard-normal sampler: Marsaglia polar method over SplitMix64 uniforms.
// Generates pairs; the spare value is cached. The full algorithm is local to
// this class so a seed pins the sample stream independent of the platform's
// normal_distribution.
class NormalSampler {
public:
    explicit NormalSampler(uint64_t seed) : rng_(seed) {}

    double next();

private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace nixforge
