#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "treesum/point_set.hpp"

namespace treesum {

enum class SplitRule { median_projection, widest_coordinate };

SplitRule split_rule_from_string(const std::string& s);
std::string to_string(SplitRule r);

/// Binary space-partitioning tree. Points are physically permuted into tree
/// order at build time, so every node owns a contiguous position range and
/// membership tests are O(1) range checks. The permutation maps tree
/// positions back to original indices; `pos_of` is its inverse; `leaf_of`
/// gives each original point's owning leaf.
class SpaceTree {
public:
    struct Node {
        std::uint32_t begin = 0, end = 0;  // owned position range [begin, end)
        std::int32_t left = -1, right = -1;
        std::uint32_t level = 0;
        bool is_leaf() const { return left < 0; }
        std::uint32_t count() const { return end - begin; }
    };

    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(std::int32_t id) const { return nodes_[id]; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t size() const { return permuted_.size(); }
    std::size_t dim() const { return permuted_.dim(); }
    std::uint32_t depth() const { return depth_; }

    /// Coordinates in tree order; row `pos` is the point at that position.
    const PointSet& permuted_points() const { return permuted_; }
    std::span<const double> point_at(std::uint32_t pos) const { return permuted_.point(pos); }

    std::uint32_t original_of(std::uint32_t pos) const { return perm_[pos]; }
    std::uint32_t position_of(std::uint32_t original) const { return pos_of_[original]; }
    std::int32_t leaf_of(std::uint32_t original) const { return leaf_of_[original]; }
    const std::vector<std::uint32_t>& permutation() const { return perm_; }

    /// True iff `node_id` owns original point `original`; O(1).
    bool owns(std::int32_t node_id, std::uint32_t original) const {
        const Node& nd = nodes_[node_id];
        const std::uint32_t p = pos_of_[original];
        return p >= nd.begin && p < nd.end;
    }

    friend SpaceTree build_space_tree(const PointSet&, std::size_t, SplitRule, std::uint64_t);

private:
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> perm_;    // pos -> original
    std::vector<std::uint32_t> pos_of_;  // original -> pos
    std::vector<std::int32_t> leaf_of_;  // original -> leaf node id
    PointSet permuted_;
    std::uint32_t depth_ = 0;
};

SpaceTree build_space_tree(const PointSet& points, std::size_t leaf_capacity,
                           SplitRule split_rule, std::uint64_t rng_seed);

/// Free-function membership test mirroring SpaceTree::owns.
inline bool node_owns(const SpaceTree& tree, std::int32_t node_id, std::uint32_t original) {
    return tree.owns(node_id, original);
}

}  // namespace treesum
