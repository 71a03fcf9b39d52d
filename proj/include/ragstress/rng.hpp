#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ragstress {

uint64_t fnv1a64(std::string_view s);

/// splitmix64 finalizer; bijective mixing of a 64-bit value.
uint64_t mix64(uint64_t x);

/// Seeded generator with fixed, platform-independent sampling algorithms.
/// std::mt19937_64 output is pinned by the standard; the distributions here
/// are hand-rolled because the std ones are not bit-stable across
/// implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53 bits of precision.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased via rejection. n must be > 0.
    uint64_t below(uint64_t n);

    /// In-place Fisher-Yates shuffle using below().
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Deterministic per-stream generator: same (seed, stream_id) always yields
/// the same sequence, distinct stream_ids yield unrelated sequences. Used to
/// make per-query work order-independent under parallelism.
Rng derive_rng(uint64_t global_seed, std::string_view stream_id);

}  // namespace ragstress
