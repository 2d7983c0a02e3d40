#pragma once

#include <cstdint>

namespace expose {

// SplitMix64 finalizer (Steele, Lea, Flood). Used to derive independent
// sub-seeds from one user-facing seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Sub-seed for a named stream. Streams: the caller assigns small indices
// (map generation, split, repetition i, ...) and gets decorrelated seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

} // namespace expose
