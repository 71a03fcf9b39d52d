#include "ragstress/rng.hpp"

#include "ragstress/errors.hpp"

namespace ragstress {

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

uint64_t Rng::below(uint64_t n) {
    if (n == 0) {
        throw InputError("Rng::below: n must be positive");
    }
    // reject the low remainder band so every residue is equally likely
    const uint64_t min = (0 - n) % n;
    for (;;) {
        uint64_t x = engine_();
        if (x >= min) {
            return x % n;
        }
    }
}

Rng derive_rng(uint64_t global_seed, std::string_view stream_id) {
    return Rng(mix64(mix64(global_seed) ^ fnv1a64(stream_id)));
}

}  // namespace ragstress
