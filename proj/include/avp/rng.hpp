#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace avp {

// SplitMix64 finalizer. Used to derive independent substreams from a seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Small deterministic PRNG. The standard library distributions are
// implementation-defined, so all sampling here is hand-rolled to keep
// seeded runs reproducible across compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform index in [0, n). n must be positive.
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    // Standard normal via Box-Muller. Consumes exactly two uniforms per call.
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

// In-place Fisher-Yates shuffle driven by the given generator.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = rng.index(i);
        std::swap(v[i - 1], v[j]);
    }
}

// Deterministic per-(seed, step, channel) standard normal draw. Independent of
// evaluation order, so partial re-simulation reproduces identical noise.
inline double gaussian_at(std::uint64_t seed, std::uint64_t step, std::uint64_t channel) {
    Rng rng(mix64(mix64(seed ^ (step * 0xd1342543de82ef95ULL)) ^ (channel * 0x9e3779b97f4a7c15ULL)));
    return rng.gaussian();
}

} // namespace avp
