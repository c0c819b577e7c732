#pragma once

#include <cstdint>

namespace thermalize {

/// splitmix64 finalizer; the standard 64-bit avalanche mix.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Splitting rule for independent per-sample streams: seed XOR sample index
/// through the 64-bit mix. Identical in serial and parallel execution.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t sample_index) {
    return mix64(seed ^ sample_index);
}

}  // namespace thermalize
