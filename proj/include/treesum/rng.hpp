#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace treesum {

// Named sub-streams of the master seed. Every randomized phase derives its
// own stream so that adding trees/nodes never reshuffles another phase.
namespace seed_stream {
inline constexpr std::uint64_t ann_tree = 0x414e4e5452ULL;
inline constexpr std::uint64_t space_tree = 0x5350545245ULL;
inline constexpr std::uint64_t skeleton = 0x534b454cULL;
inline constexpr std::uint64_t dataset = 0x44415441ULL;
inline constexpr std::uint64_t error_sample = 0x4552525341ULL;
inline constexpr std::uint64_t sigma_sample = 0x5349474d41ULL;
}  // namespace seed_stream

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic seed for (master seed, stream, index). Used so per-tree and
// per-node RNG is independent of build order and thread count.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ stream) ^ index);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    return std::mt19937_64(mix_seed(seed, stream, index));
}

// m distinct draws from {0..n-1} \ excluded, ascending order not guaranteed.
// `excluded` must return true for indices to skip.
template <typename ExcludedFn>
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m,
                                                    std::mt19937_64& rng, ExcludedFn excluded) {
    std::vector<std::size_t> out;
    if (m == 0) return out;
    out.reserve(m);
    std::vector<bool> taken(n, false);
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    std::size_t attempts = 0;
    const std::size_t max_attempts = 64 * m + 256;
    while (out.size() < m && attempts < max_attempts) {
        ++attempts;
        std::size_t j = dist(rng);
        if (taken[j] || excluded(j)) continue;
        taken[j] = true;
        out.push_back(j);
    }
    if (out.size() < m) {
        // dense fallback when the admissible set is small relative to n
        for (std::size_t j = 0; j < n && out.size() < m; ++j) {
            if (!taken[j] && !excluded(j)) {
                taken[j] = true;
                out.push_back(j);
            }
        }
    }
    return out;
}

}  // namespace treesum
