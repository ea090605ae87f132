#include "treesum/skeleton.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "treesum/rng.hpp"

namespace treesum {

IdResult interpolative_decomposition(const Eigen::MatrixXd& A, std::size_t rank_s) {
    const std::size_t rows = static_cast<std::size_t>(A.rows());
    const std::size_t cols = static_cast<std::size_t>(A.cols());
    if (rank_s < 1 || rank_s > std::min(rows, cols))
        throw std::invalid_argument("interpolative_decomposition: rank out of range");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    const auto& piv = qr.colsPermutation().indices();  // piv(j) = original column of pivot j

    IdResult id;
    id.skeleton_cols.resize(rank_s);
    for (std::size_t i = 0; i < rank_s; ++i) id.skeleton_cols[i] = piv(static_cast<Eigen::Index>(i));
    id.rest_cols.resize(cols - rank_s);
    for (std::size_t j = rank_s; j < cols; ++j)
        id.rest_cols[j - rank_s] = piv(static_cast<Eigen::Index>(j));

    const Eigen::MatrixXd R =
        qr.matrixR().topRows(static_cast<Eigen::Index>(rank_s)).triangularView<Eigen::Upper>();

    // effective rank: leading diagonal entries above the relative cutoff
    // (pivoted QR keeps |diag| nonincreasing)
    const double head = std::abs(R(0, 0));
    std::size_t r = 0;
    while (r < rank_s && std::abs(R(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r))) >=
                             1e-12 * head && head > 0.0)
        ++r;
    id.effective_rank = r;

    id.proj = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rank_s),
                                    static_cast<Eigen::Index>(cols - rank_s));
    if (r > 0 && cols > rank_s) {
        const auto ri = static_cast<Eigen::Index>(r);
        id.proj.topRows(ri) = R.topLeftCorner(ri, ri).triangularView<Eigen::Upper>().solve(
            R.block(0, static_cast<Eigen::Index>(rank_s), ri,
                    static_cast<Eigen::Index>(cols - rank_s)));
    }
    return id;
}

SampleDesign build_sample_design(const SpaceTree& tree, std::int32_t node,
                                 std::span<const std::uint32_t> candidates,
                                 const KnnGraph& knn, std::size_t uniform_samples,
                                 std::size_t neighbor_row_cap, std::uint64_t rng_seed) {
    const auto& nd = tree.node(node);
    const std::size_t n = tree.size();

    SampleDesign design;
    auto in_node = [&](std::uint32_t pos) { return pos >= nd.begin && pos < nd.end; };

    // out-of-node nearest neighbors of the candidate sources
    for (std::uint32_t cpos : candidates) {
        const std::uint32_t orig = tree.original_of(cpos);
        for (std::int64_t nb : knn.row(orig)) {
            const std::uint32_t npos = tree.position_of(static_cast<std::uint32_t>(nb));
            if (!in_node(npos)) design.rows.push_back(npos);
        }
    }
    std::sort(design.rows.begin(), design.rows.end());
    design.rows.erase(std::unique(design.rows.begin(), design.rows.end()), design.rows.end());

    std::mt19937_64 rng(rng_seed);
    if (neighbor_row_cap > 0 && design.rows.size() > neighbor_row_cap) {
        // uniform subsample without replacement: partial Fisher-Yates
        for (std::size_t i = 0; i < neighbor_row_cap; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, design.rows.size() - 1);
            std::swap(design.rows[i], design.rows[pick(rng)]);
        }
        design.rows.resize(neighbor_row_cap);
        std::sort(design.rows.begin(), design.rows.end());
    }

    if (uniform_samples > 0) {
        std::vector<bool> present(n, false);
        for (std::uint32_t pos : design.rows) present[pos] = true;
        auto extra = sample_without_replacement(
            n, uniform_samples, rng,
            [&](std::size_t pos) { return in_node(static_cast<std::uint32_t>(pos)) || present[pos]; });
        for (std::size_t pos : extra) design.rows.push_back(static_cast<std::uint32_t>(pos));
        std::sort(design.rows.begin(), design.rows.end());
    }
    return design;
}

Skeleton skeletonize_node(const SpaceTree& tree, std::int32_t node,
                          std::span<const std::uint32_t> candidates,
                          std::span<const double> candidate_weights,
                          const SampleDesign& design, const KernelSpec& kernel,
                          std::size_t rank_s) {
    if (rank_s < 1) throw std::invalid_argument("skeletonize_node: rank_s must be >= 1");
    if (candidates.size() != candidate_weights.size())
        throw std::invalid_argument("skeletonize_node: weights do not match candidates");

    Skeleton sk;
    sk.node = node;
    sk.candidate_count = candidates.size();
    sk.design_rows = design.rows.size();
    if (design.empty() || candidates.empty()) return sk;  // non-compressible marker

    const std::size_t c = candidates.size();
    const std::size_t rows = design.rows.size();
    const std::size_t s = std::min({rank_s, c, rows});

    Eigen::MatrixXd A(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(c));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto target = tree.point_at(design.rows[r]);
        for (std::size_t j = 0; j < c; ++j)
            A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                kernel_eval(kernel, target, tree.point_at(candidates[j]),
                            tree.original_of(candidates[j]));
    }

    IdResult id = interpolative_decomposition(A, s);

    sk.compressible = true;
    sk.effective_rank = id.effective_rank;
    sk.point_pos.resize(s);
    sk.point_idx.resize(s);
    sk.weights.resize(s);
    for (std::size_t i = 0; i < s; ++i) {
        const std::uint32_t pos = candidates[id.skeleton_cols[i]];
        sk.point_pos[i] = pos;
        sk.point_idx[i] = tree.original_of(pos);
        sk.weights[i] = candidate_weights[id.skeleton_cols[i]];
    }
    // weight folding: w_eff = w_skel + proj * w_rest
    for (std::size_t j = 0; j < id.rest_cols.size(); ++j) {
        const double wr = candidate_weights[id.rest_cols[j]];
        if (wr == 0.0) continue;
        for (std::size_t i = 0; i < s; ++i)
            sk.weights[i] += id.proj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * wr;
    }
    for (double w : sk.weights)
        if (!std::isfinite(w))
            throw std::runtime_error("skeletonize_node: non-finite effective weight");
    return sk;
}

std::vector<Skeleton> build_all_skeletons(const SpaceTree& tree, const KnnGraph& knn,
                                          const KernelSpec& kernel, const PointSet& points,
                                          const WeightVector& weights,
                                          const SkeletonParams& params) {
    const std::size_t n = tree.size();
    if (knn.n != n || points.size() != n)
        throw std::invalid_argument("build_all_skeletons: tree/knn/points size mismatch");
    validate_weights(weights, n);
    kernel.validate(n);
    if (params.rank_s < 1) throw std::invalid_argument("build_all_skeletons: rank_s >= 1");

    const std::size_t row_cap =
        params.row_cap > 0 ? params.row_cap : 4 * params.rank_s + params.uniform_samples;
    const std::size_t neighbor_cap =
        row_cap > params.uniform_samples ? row_cap - params.uniform_samples : 0;

    // weights in tree order
    std::vector<double> wpos(n);
    for (std::uint32_t pos = 0; pos < n; ++pos) wpos[pos] = weights[tree.original_of(pos)];

    const auto& nodes = tree.nodes();
    std::vector<Skeleton> skeletons(nodes.size());

    auto level_gated = [&](const SpaceTree::Node& nd) {
        if (params.min_skeleton_level >= 0)
            return nd.level < static_cast<std::uint32_t>(params.min_skeleton_level);
        return nd.count() > n / 2;  // auto rule: near-root nodes have no usable far field
    };

    // group by level, deepest first (children before parents)
    std::vector<std::vector<std::int32_t>> by_level(tree.depth() + 1);
    for (std::size_t id = 0; id < nodes.size(); ++id)
        by_level[nodes[id].level].push_back(static_cast<std::int32_t>(id));

    const int nthreads = params.threads > 0 ? params.threads : omp_get_max_threads();
    for (std::size_t lvl = by_level.size(); lvl-- > 0;) {
        auto& level_nodes = by_level[lvl];
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
        for (std::ptrdiff_t li = 0; li < static_cast<std::ptrdiff_t>(level_nodes.size()); ++li) {
            const std::int32_t id = level_nodes[li];
            const auto& nd = nodes[id];
            Skeleton& out = skeletons[id];

            std::vector<std::uint32_t> cand;
            std::vector<double> cw;
            if (nd.is_leaf()) {
                cand.resize(nd.count());
                cw.resize(nd.count());
                for (std::uint32_t pos = nd.begin; pos < nd.end; ++pos) {
                    cand[pos - nd.begin] = pos;
                    cw[pos - nd.begin] = wpos[pos];
                }
            } else {
                const Skeleton& l = skeletons[nd.left];
                const Skeleton& r = skeletons[nd.right];
                if (!l.compressible || !r.compressible) {
                    out.node = id;  // non-compressible propagates upward
                    continue;
                }
                cand.reserve(l.size() + r.size());
                cw.reserve(l.size() + r.size());
                cand.insert(cand.end(), l.point_pos.begin(), l.point_pos.end());
                cand.insert(cand.end(), r.point_pos.begin(), r.point_pos.end());
                cw.insert(cw.end(), l.weights.begin(), l.weights.end());
                cw.insert(cw.end(), r.weights.begin(), r.weights.end());
            }

            if (level_gated(nd)) {
                out.node = id;
                out.candidate_count = cand.size();
                continue;
            }

            const std::uint64_t node_seed =
                mix_seed(params.rng_seed, seed_stream::skeleton, static_cast<std::uint64_t>(id));
            SampleDesign design =
                build_sample_design(tree, id, cand, knn, params.uniform_samples, neighbor_cap,
                                    node_seed);
            out = skeletonize_node(tree, id, cand, cw, design, kernel, params.rank_s);
        }
    }
    return skeletons;
}

}  // namespace treesum
