#pragma once

#include <cstdint>
#include <random>

namespace mpnet {

// splitmix64 finalizer; decorrelates nearby inputs.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based seed derivation: every random decision in the project draws
// from an rng seeded by (base seed, purpose tag, step, item). This keeps
// training resumable: no rng state has to be checkpointed.
inline uint64_t derive_seed(uint64_t base, uint64_t tag, uint64_t a = 0, uint64_t b = 0) {
    return mix64(mix64(mix64(base ^ tag) ^ a) ^ b);
}

inline std::mt19937_64 make_rng(uint64_t base, uint64_t tag, uint64_t a = 0, uint64_t b = 0) {
    return std::mt19937_64(derive_seed(base, tag, a, b));
}

// purpose tags
inline constexpr uint64_t kSeedInit = 0x696e6974;      // parameter init
inline constexpr uint64_t kSeedPlan = 0x706c616e;      // permutation sampling
inline constexpr uint64_t kSeedCorrupt = 0x636f7272;   // 8:1:1 draws
inline constexpr uint64_t kSeedDropout = 0x64726f70;   // dropout masks
inline constexpr uint64_t kSeedShuffle = 0x73687566;   // epoch row order
inline constexpr uint64_t kSeedProbe = 0x70726f62;     // analysis probes

}  // namespace mpnet
