#pragma once

#include <cstdint>
#include <string_view>

namespace specrej::rng {

/// SplitMix64 finalizer.  Stateless; the whole sampler is a pure function of
/// its counters, so any sequence/step can be regenerated in isolation and
/// results cannot depend on thread scheduling.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

/// One 64-bit draw for (seed, stream, step).  `stream` is the sequence index
/// within a run, `step` the 0-based position of the token being sampled.
constexpr std::uint64_t draw_bits(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t step) noexcept {
    std::uint64_t h = mix64(seed ^ 0xD6E8FEB86659FD93ULL);
    h = mix64(h ^ stream);
    h = mix64(h ^ step);
    return h;
}

/// Uniform double in [0, 1).  Top 53 bits scaled by 2^-53: exact in binary64,
/// identical on every platform that has IEEE doubles.
inline double draw_unit(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t step) noexcept {
    return static_cast<double>(draw_bits(seed, stream, step) >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for one prompt's work.  Derived, not sequential, so prompts can run
/// on any thread in any order and still see the same draws.
constexpr std::uint64_t derive_prompt_seed(std::uint64_t run_seed,
                                           std::string_view prompt_id) noexcept {
    return mix64(mix64(run_seed ^ 0x9E3779B97F4A7C15ULL) ^ fnv1a64(prompt_id));
}

} // namespace specrej::rng
