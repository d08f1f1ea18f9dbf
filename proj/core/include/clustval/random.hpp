#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace clustval {

/// Seeded generator with platform-independent draws. std::*_distribution
/// output differs between standard libraries, so the helpers below are used
/// wherever results must be reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform integer in [0, n), unbiased.
    std::size_t index(std::size_t n);
    /// Standard normal (Box-Muller, no cached second value).
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 mix of (seed, stream); used to derive independent child seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// FNV-1a of a byte string.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace clustval
