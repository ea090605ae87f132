#pragma once

#include <cstdint>
#include <string>

#include "treesum/point_set.hpp"

namespace treesum {

/// Embedding used by generate_manifold_dataset.
enum class ManifoldMap {
    identity,    ///< requires d_intrinsic == d_ambient; copies latent coordinates
    linear,      ///< random linear map only (output has exactly d_intrinsic nonzero directions)
    sinusoidal,  ///< random linear map plus coordinatewise sinusoids (default)
};

ManifoldMap manifold_map_from_string(const std::string& s);
std::string to_string(ManifoldMap m);

/// Samples n latent points uniform in [0,1]^d_intrinsic, embeds them into
/// R^d_ambient through a seed-derived map, and adds isotropic Gaussian noise
/// of the given scale. Deterministic for a given (seed, map, sizes).
PointSet generate_manifold_dataset(std::size_t n, std::size_t d_ambient, std::size_t d_intrinsic,
                                   double noise, std::uint64_t seed,
                                   ManifoldMap map = ManifoldMap::sinusoidal);

/// Standard-normal weights from a seed-derived stream; the companion of the
/// dataset generator for benchmarks.
WeightVector generate_weights(std::size_t n, std::uint64_t seed);

}  // namespace treesum
