#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "treesum/ann.hpp"
#include "treesum/kernel.hpp"
#include "treesum/space_tree.hpp"

namespace treesum {

/// Result of a rank-s interpolative decomposition A ~= A[:, skeleton] * [I | proj]
/// (columns listed in pivot order). `rest_cols` carries the pivot order of the
/// non-skeleton columns so [I | proj] is applied consistently.
struct IdResult {
    std::vector<std::size_t> skeleton_cols;  // s chosen columns of A, pivot order
    std::vector<std::size_t> rest_cols;      // remaining c-s columns, pivot order
    Eigen::MatrixXd proj;                    // s x (c-s) interpolation matrix
    std::size_t effective_rank = 0;          // <= s, reduced on numerical singularity
};

/// Column-pivoted QR interpolative decomposition: the first rank_s pivot
/// columns become the skeleton and proj = R11^-1 R12 by triangular solve.
/// Diagonal entries of R11 below 1e-12 * |R11(0,0)| reduce the effective
/// rank; the corresponding proj rows are zero. Throws std::invalid_argument
/// unless 1 <= rank_s <= min(rows, cols).
IdResult interpolative_decomposition(const Eigen::MatrixXd& A, std::size_t rank_s);

/// Sampled target rows for one node's far-field block: out-of-node nearest
/// neighbors of the candidate sources, capped by uniform subsampling, padded
/// with uniform out-of-node draws. Rows are tree positions, deduplicated and
/// sorted; empty means the node cannot be compressed (e.g. the root).
struct SampleDesign {
    std::vector<std::uint32_t> rows;
    bool empty() const { return rows.empty(); }
};

SampleDesign build_sample_design(const SpaceTree& tree, std::int32_t node,
                                 std::span<const std::uint32_t> candidates,
                                 const KnnGraph& knn, std::size_t uniform_samples,
                                 std::size_t neighbor_row_cap, std::uint64_t rng_seed);

/// Per-node far-field representation: s skeleton points and the effective
/// weights that reproduce the node's candidate sum at distant targets.
struct Skeleton {
    std::int32_t node = -1;
    bool compressible = false;
    std::vector<std::uint32_t> point_pos;  // tree positions, pivot order
    std::vector<std::uint32_t> point_idx;  // original indices, same order
    std::vector<double> weights;           // effective weights
    std::size_t candidate_count = 0;
    std::size_t effective_rank = 0;
    std::size_t design_rows = 0;

    std::size_t size() const { return point_pos.size(); }
};

/// Skeletonizes one node from its candidate columns: forms the sampled kernel
/// block A[r, j] = K(x_r, x_j), runs the ID at s = min(rank_s, c, rows), and
/// folds weights as w_skel + proj * w_rest. An empty design yields a
/// non-compressible marker.
Skeleton skeletonize_node(const SpaceTree& tree, std::int32_t node,
                          std::span<const std::uint32_t> candidates,
                          std::span<const double> candidate_weights,
                          const SampleDesign& design, const KernelSpec& kernel,
                          std::size_t rank_s);

struct SkeletonParams {
    std::size_t rank_s = 64;
    std::size_t uniform_samples = 32;
    // -1: auto rule, nodes owning more than N/2 points are never compressed;
    // >= 0: nodes at levels closer to the root than this are skipped.
    int min_skeleton_level = -1;
    std::size_t row_cap = 0;  // total sampled-row cap; 0 means 4*rank_s + uniform_samples
    std::uint64_t rng_seed = 0;
    int threads = 0;
};

/// Bottom-up hierarchical skeletonization: leaves compress their owned points
/// with the true weights, internal nodes compress the union of their
/// children's skeletons with the children's effective weights. Nodes failing
/// the level gate, lacking out-of-node samples, or missing a child skeleton
/// are marked non-compressible. Returns one Skeleton per tree node.
std::vector<Skeleton> build_all_skeletons(const SpaceTree& tree, const KnnGraph& knn,
                                          const KernelSpec& kernel, const PointSet& points,
                                          const WeightVector& weights,
                                          const SkeletonParams& params);

}  // namespace treesum
