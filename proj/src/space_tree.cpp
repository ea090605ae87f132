#include "treesum/space_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "treesum/rng.hpp"

namespace treesum {

SplitRule split_rule_from_string(const std::string& s) {
    if (s == "median-projection") return SplitRule::median_projection;
    if (s == "widest-coordinate") return SplitRule::widest_coordinate;
    throw std::invalid_argument("unknown split rule: " + s);
}

std::string to_string(SplitRule r) {
    return r == SplitRule::median_projection ? "median-projection" : "widest-coordinate";
}

namespace {

struct Frame {
    std::uint32_t begin, end;
    std::int32_t node;
    std::uint32_t level;
};

}  // namespace

SpaceTree build_space_tree(const PointSet& points, std::size_t leaf_capacity,
                           SplitRule split_rule, std::uint64_t rng_seed) {
    if (leaf_capacity < 1) throw std::invalid_argument("build_space_tree: leaf_capacity >= 1");
    const std::size_t n = points.size();
    const std::size_t d = points.dim();
    if (n == 0) throw std::invalid_argument("build_space_tree: empty point set");

    SpaceTree tree;
    tree.perm_.resize(n);
    std::iota(tree.perm_.begin(), tree.perm_.end(), 0u);
    std::vector<double> key(n);

    std::mt19937_64 rng(mix_seed(rng_seed, seed_stream::space_tree));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> dir(d);

    tree.nodes_.emplace_back();
    tree.nodes_[0].begin = 0;
    tree.nodes_[0].end = static_cast<std::uint32_t>(n);
    std::vector<Frame> stack{{0u, static_cast<std::uint32_t>(n), 0, 0u}};

    auto& work = tree.perm_;
    while (!stack.empty()) {
        const Frame fr = stack.back();
        stack.pop_back();
        const std::uint32_t count = fr.end - fr.begin;
        tree.depth_ = std::max(tree.depth_, fr.level);

        if (count <= leaf_capacity) continue;  // leaf; range already recorded

        // split key: projection onto a random unit direction, or the widest
        // coordinate of this node's bounding box
        if (split_rule == SplitRule::median_projection) {
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    dir[i] = gauss(rng);
                    norm2 += dir[i] * dir[i];
                }
            } while (norm2 == 0.0);
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::uint32_t i = fr.begin; i < fr.end; ++i) {
                const auto p = points.point(work[i]);
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) s += inv * dir[c] * p[c];
                key[work[i]] = s;
            }
        } else {
            std::size_t widest = 0;
            double best_spread = -1.0;
            for (std::size_t c = 0; c < d; ++c) {
                double lo = points.point(work[fr.begin])[c], hi = lo;
                for (std::uint32_t i = fr.begin + 1; i < fr.end; ++i) {
                    const double v = points.point(work[i])[c];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                if (hi - lo > best_spread) {
                    best_spread = hi - lo;
                    widest = c;
                }
            }
            for (std::uint32_t i = fr.begin; i < fr.end; ++i)
                key[work[i]] = points.point(work[i])[widest];
        }

        // balanced median split under the strict (key, index) order; identical
        // points therefore still split evenly and the build always terminates
        const std::uint32_t left_count = (count + 1) / 2;
        std::nth_element(work.begin() + fr.begin, work.begin() + fr.begin + left_count - 1,
                         work.begin() + fr.end, [&](std::uint32_t a, std::uint32_t b) {
                             return key[a] < key[b] || (key[a] == key[b] && a < b);
                         });

        SpaceTree::Node& node = tree.nodes_[fr.node];
        node.left = static_cast<std::int32_t>(tree.nodes_.size());
        node.right = node.left + 1;
        tree.nodes_.emplace_back();
        tree.nodes_.emplace_back();
        const std::int32_t left_id = tree.nodes_[fr.node].left;
        const std::int32_t right_id = tree.nodes_[fr.node].right;
        tree.nodes_[left_id] = {fr.begin, fr.begin + left_count, -1, -1, fr.level + 1};
        tree.nodes_[right_id] = {fr.begin + left_count, fr.end, -1, -1, fr.level + 1};
        stack.push_back({fr.begin + left_count, fr.end, right_id, fr.level + 1});
        stack.push_back({fr.begin, fr.begin + left_count, left_id, fr.level + 1});
    }

    // freeze the permutation: copy coordinates into tree order, invert
    tree.permuted_ = PointSet(n, d);
    tree.pos_of_.resize(n);
    for (std::uint32_t pos = 0; pos < n; ++pos) {
        const std::uint32_t orig = tree.perm_[pos];
        tree.pos_of_[orig] = pos;
        auto dst = tree.permuted_.point(pos);
        const auto src = points.point(orig);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    tree.leaf_of_.assign(n, -1);
    for (std::size_t id = 0; id < tree.nodes_.size(); ++id) {
        const auto& nd = tree.nodes_[id];
        if (!nd.is_leaf()) continue;
        for (std::uint32_t pos = nd.begin; pos < nd.end; ++pos)
            tree.leaf_of_[tree.perm_[pos]] = static_cast<std::int32_t>(id);
    }
    return tree;
}

}  // namespace treesum
