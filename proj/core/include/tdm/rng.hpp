#pragma once

#include <cstdint>
#include <vector>

namespace tdm {

/// Small deterministic PRNG (splitmix64). Used everywhere a seed appears so
/// that results are reproducible independent of the standard library's
/// distribution implementations.
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

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        // Rejection sampling keeps the draw unbiased.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    /// Independent child stream; does not advance this generator.
    Rng fork(std::uint64_t stream) const {
        Rng child(state_ ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL));
        child.next_u64();
        return child;
    }

private:
    std::uint64_t state_;
};

/// Fisher-Yates shuffle driven by Rng.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace tdm
