#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treesum/ann.hpp"
#include "treesum/kernel.hpp"
#include "treesum/point_set.hpp"
#include "treesum/skeleton.hpp"
#include "treesum/space_tree.hpp"

namespace treesum {

struct EvalConfig {
    std::size_t k_prune = 0;    ///< neighbors per target used for pruning; 0 means all of knn.k
    bool include_self = true;   ///< count the j == i term of the sum
    int threads = 0;            ///< OpenMP threads; 0 = library default
};

/// Tallies for one evaluation run. Counters are exact regardless of thread count.
struct EvalStats {
    std::uint64_t nodes_visited = 0;
    std::uint64_t nodes_pruned = 0;
    std::uint64_t direct_interactions = 0;
    std::uint64_t skeleton_interactions = 0;
    /// nodes that satisfied the neighbor criterion but lacked a usable
    /// skeleton and therefore had to be descended instead
    std::uint64_t missing_skeleton_blocks = 0;
    double wall_seconds = 0.0;
};

/// Optional per-target instrumentation, parallel to the target list.
struct EvalAudit {
    std::vector<std::uint64_t> direct_count;   ///< direct source interactions
    std::vector<std::uint64_t> pruned_points;  ///< points covered by pruned subtrees
    /// owned ranges [begin,end) in tree positions of every pruned node
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> pruned_ranges;
};

/// Exact reference evaluator: u_i = sum_j K(x_i, x_j) w_j with j running
/// 0..N-1 in storage order. O(N * d) per target.
PotentialVector direct_sum(const PointSet& points, const WeightVector& weights,
                           const KernelSpec& kernel, std::span<const std::uint32_t> targets,
                           bool include_self = true, int threads = 0);

/// Neighbor-pruning test: true iff `node` owns none of the target's first
/// k_prune neighbors, does not own the target, and carries a usable skeleton.
bool prunable(const SpaceTree& tree, const std::vector<Skeleton>& skeletons, const KnnGraph& knn,
              const EvalConfig& cfg, std::uint32_t target, std::int32_t node);

/// Per-target depth-first treecode evaluation. Pruned nodes contribute via
/// their skeleton's effective weights; blocked leaves are summed directly.
/// Output is aligned with `targets`. Summation order is fixed (preorder),
/// so results do not depend on the thread count.
PotentialVector treecode_eval(const SpaceTree& tree, const std::vector<Skeleton>& skeletons,
                              const KnnGraph& knn, const PointSet& points,
                              const WeightVector& weights, const KernelSpec& kernel,
                              const EvalConfig& cfg, std::span<const std::uint32_t> targets,
                              EvalStats* stats = nullptr, EvalAudit* audit = nullptr);

/// ||approx - exact||_2 / ||exact||_2. Throws std::domain_error when the
/// exact norm is zero.
double relative_error(const PotentialVector& approx, const PotentialVector& exact);

/// Same, restricted to the sampled indices of both full-length vectors.
double relative_error(const PotentialVector& approx, const PotentialVector& exact,
                      std::span<const std::uint32_t> sample);

}  // namespace treesum
