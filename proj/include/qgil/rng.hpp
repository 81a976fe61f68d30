#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace qgil {

// SplitMix64 step. Used both for seed derivation and for expanding a user
// seed into generator state.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent child seed from (seed, tag). Chain calls to mix in
// more than one tag (iteration index, episode index, ...).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
    return mix_seed(mix_seed(seed, a, b), c);
}

// Deterministic random stream. Doubles are produced from raw 64-bit draws so
// sequences do not depend on standard-library distribution internals.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    RngStream child(std::uint64_t tag) { return RngStream(mix_seed(next_u64(), tag)); }

private:
    std::mt19937_64 gen_;
};

}  // namespace qgil
