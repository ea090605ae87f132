#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "treesum/point_set.hpp"

namespace treesum {

enum class KernelFamily { gaussian_fixed, gaussian_variable, laplace_reciprocal };

/// Kernel definition. gaussian_fixed: K(x,y) = exp(-|x-y|^2 / sigma^2).
/// gaussian_variable: per-source bandwidth, K(x, x_j) = exp(-|x-x_j|^2 / sigma_j^2)
/// with sigma_j read from `sigmas` at the source index.
/// laplace_reciprocal: K(x,y) = 1/(|x-y| + epsilon); by convention the value is 0
/// when x == y and epsilon == 0, so the singular self term drops out of sums.
struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian_fixed;
    double sigma = 1.0;
    std::vector<double> sigmas;  // per-source, gaussian_variable only
    double epsilon = 0.0;        // laplace_reciprocal regularizer

    /// Throws std::invalid_argument if parameters are unusable for a point
    /// set of size n (sigma <= 0, sigmas length/positivity, epsilon < 0).
    void validate(std::size_t n) const;
};

KernelFamily kernel_family_from_string(const std::string& s);
std::string to_string(KernelFamily f);

/// One kernel evaluation. `source_index` selects sigma_j for the variable
/// bandwidth family and is ignored otherwise. Throws std::invalid_argument
/// on dimension mismatch. Deterministic; defined out-of-line so every caller
/// shares one code path (bit-identical results).
double kernel_eval(const KernelSpec& spec, std::span<const double> target,
                   std::span<const double> source, std::size_t source_index);

/// Batched row: elementwise identical to kernel_eval over source_indices.
std::vector<double> kernel_row(const KernelSpec& spec, std::span<const double> target,
                               const PointSet& sources,
                               std::span<const std::size_t> source_indices);

}  // namespace treesum
