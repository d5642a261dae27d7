#pragma once

#include <cstdint>
#include <random>

namespace csma {

// splitmix64; used to derive independent sub-stream seeds from one root seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// All randomness in one simulation instance flows from a single root seed.
// Each phase (arrivals, control phase, scheduling coin flips) gets its own
// mt19937_64 stream so reordering one phase cannot perturb another.
struct RngBundle {
    std::mt19937_64 arrivals;
    std::mt19937_64 control;
    std::mt19937_64 activation;

    explicit RngBundle(std::uint64_t seed)
        : arrivals(splitmix64(seed ^ 0xA11CE5ULL)),
          control(splitmix64(seed ^ 0xC0117801ULL)),
          activation(splitmix64(seed ^ 0x5C4ED01EULL)) {}
};

inline std::uint64_t derive_subseed(std::uint64_t root, std::uint64_t index) {
    return splitmix64(root + 0x1000003ULL * (index + 1));
}

}  // namespace csma
