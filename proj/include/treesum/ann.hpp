#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "treesum/point_set.hpp"

namespace treesum {

/// Per-point approximate (or exact) k-nearest-neighbor lists. Rows are sorted
/// by nondecreasing Euclidean distance, ties broken by lower index, self
/// excluded.
struct KnnGraph {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::int64_t> neighbors;  // n*k, row-major
    std::vector<double> distances;        // n*k, Euclidean

    std::span<const std::int64_t> row(std::size_t i) const {
        return {neighbors.data() + i * k, k};
    }
    std::span<const double> row_distances(std::size_t i) const {
        return {distances.data() + i * k, k};
    }
};

/// Random projection tree: internal nodes carry a unit direction and a split
/// threshold (points with projection <= threshold go left), leaves own index
/// lists. Built by median splits; when every projection in a node ties (e.g.
/// duplicate points) the node falls back to a balanced index split.
struct RpTree {
    struct Node {
        std::vector<double> direction;      // empty for leaves
        double threshold = 0.0;
        std::int32_t left = -1, right = -1; // -1 for leaves
        std::uint32_t begin = 0, end = 0;   // leaf range into `leaf_points`
        bool is_leaf() const { return left < 0; }
    };
    std::vector<Node> nodes;                // preorder, 0 = root
    std::vector<std::uint32_t> leaf_points; // concatenated leaf index lists
    std::vector<std::int32_t> leaf_of;      // point -> owning leaf node id

    std::span<const std::uint32_t> leaf_members(std::int32_t node_id) const {
        const Node& nd = nodes[node_id];
        return {leaf_points.data() + nd.begin, nd.end - nd.begin};
    }
    /// Descends from the root by threshold comparisons.
    std::int32_t find_leaf(std::span<const double> point) const;
};

RpTree build_rp_tree(const PointSet& points, std::size_t leaf_size, std::uint64_t rng_seed);

/// Multi-tree greedy search: candidates for each point are the union, over
/// num_trees independently seeded trees, of the points sharing its leaf; the
/// best k by Euclidean distance are retained. Tree t of a run with seed S is
/// seeded by (S, t), so larger num_trees extends the candidate union of a
/// smaller one instead of reshuffling it.
KnnGraph knn_greedy(const PointSet& points, std::size_t k, std::size_t num_trees,
                    std::size_t leaf_size, std::uint64_t rng_seed, int threads = 0);

/// Brute-force exact kNN oracle, O(N^2 d).
KnnGraph knn_exact(const PointSet& points, std::size_t k, int threads = 0);

/// Fraction of exact neighbors recovered, averaged over points.
double knn_recall(const KnnGraph& approx, const KnnGraph& exact);

// Binary cache format: int64 N, int64 k, then N*k int64 indices, then
// N*k float64 distances, little-endian.
void save_knn(const std::string& path, const KnnGraph& g);
KnnGraph load_knn(const std::string& path);

}  // namespace treesum
