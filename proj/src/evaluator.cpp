#include "treesum/evaluator.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace treesum {

namespace {

// any sorted position in [begin, end)?
bool range_blocked(const std::vector<std::uint32_t>& sorted_pos, std::uint32_t begin,
                   std::uint32_t end) {
    auto it = std::lower_bound(sorted_pos.begin(), sorted_pos.end(), begin);
    return it != sorted_pos.end() && *it < end;
}

// target's own position plus its first k_prune neighbor positions, sorted
std::vector<std::uint32_t> prune_positions(const SpaceTree& tree, const KnnGraph& knn,
                                           std::uint32_t target, std::size_t k_prune) {
    std::vector<std::uint32_t> ps;
    ps.reserve(k_prune + 1);
    ps.push_back(tree.position_of(target));
    const auto row = knn.row(target);
    for (std::size_t j = 0; j < k_prune; ++j)
        ps.push_back(tree.position_of(static_cast<std::uint32_t>(row[j])));
    std::sort(ps.begin(), ps.end());
    return ps;
}

std::size_t resolve_k_prune(const EvalConfig& cfg, const KnnGraph& knn) {
    const std::size_t k_prune = cfg.k_prune == 0 ? knn.k : cfg.k_prune;
    if (k_prune < 1 || k_prune > knn.k)
        throw std::invalid_argument("k_prune must be in [1, knn.k]");
    return k_prune;
}

}  // namespace

PotentialVector direct_sum(const PointSet& points, const WeightVector& weights,
                           const KernelSpec& kernel, std::span<const std::uint32_t> targets,
                           bool include_self, int threads) {
    const std::size_t n = points.size();
    validate_weights(weights, n);
    kernel.validate(n);
    for (std::uint32_t t : targets)
        if (t >= n) throw std::out_of_range("direct_sum: target index out of range");

    PotentialVector u(targets.size(), 0.0);
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(nthreads)
    for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(targets.size()); ++ti) {
        const std::uint32_t i = targets[ti];
        const auto xi = points.point(i);
        double acc = 0.0;
        for (std::uint32_t j = 0; j < n; ++j) {
            if (!include_self && j == i) continue;
            acc += kernel_eval(kernel, xi, points.point(j), j) * weights[j];
        }
        u[ti] = acc;
    }
    return u;
}

bool prunable(const SpaceTree& tree, const std::vector<Skeleton>& skeletons, const KnnGraph& knn,
              const EvalConfig& cfg, std::uint32_t target, std::int32_t node) {
    if (target >= tree.size()) throw std::out_of_range("prunable: target out of range");
    if (node < 0 || static_cast<std::size_t>(node) >= tree.nodes().size())
        throw std::out_of_range("prunable: node out of range");
    const std::size_t k_prune = resolve_k_prune(cfg, knn);
    const auto ps = prune_positions(tree, knn, target, k_prune);
    const auto& nd = tree.node(node);
    return !range_blocked(ps, nd.begin, nd.end) &&
           skeletons[static_cast<std::size_t>(node)].compressible;
}

PotentialVector treecode_eval(const SpaceTree& tree, const std::vector<Skeleton>& skeletons,
                              const KnnGraph& knn, const PointSet& points,
                              const WeightVector& weights, const KernelSpec& kernel,
                              const EvalConfig& cfg, std::span<const std::uint32_t> targets,
                              EvalStats* stats, EvalAudit* audit) {
    const std::size_t n = tree.size();
    if (points.size() != n || knn.n != n)
        throw std::invalid_argument("treecode_eval: tree/points/knn size mismatch");
    if (skeletons.size() != tree.nodes().size())
        throw std::invalid_argument("treecode_eval: skeleton list does not match tree");
    validate_weights(weights, n);
    kernel.validate(n);
    const std::size_t k_prune = resolve_k_prune(cfg, knn);
    for (std::uint32_t t : targets)
        if (t >= n) throw std::out_of_range("treecode_eval: target index out of range");

    // weights in tree order for the direct leaf sums
    std::vector<double> wpos(n);
    for (std::uint32_t pos = 0; pos < static_cast<std::uint32_t>(n); ++pos)
        wpos[pos] = weights[tree.original_of(pos)];

    PotentialVector u(targets.size(), 0.0);
    if (audit) {
        audit->direct_count.assign(targets.size(), 0);
        audit->pruned_points.assign(targets.size(), 0);
        audit->pruned_ranges.assign(targets.size(), {});
    }

    const auto t0 = std::chrono::steady_clock::now();
    const int nthreads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
    EvalStats total;
#pragma omp parallel num_threads(nthreads)
    {
        EvalStats local;
        std::vector<std::int32_t> stack;
        std::vector<std::uint32_t> ps;
#pragma omp for schedule(dynamic, 4)
        for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(targets.size()); ++ti) {
            const std::uint32_t tgt = targets[ti];
            const auto xi = points.point(tgt);
            const std::uint32_t self_pos = tree.position_of(tgt);

            ps.clear();
            ps.push_back(self_pos);
            const auto row = knn.row(tgt);
            for (std::size_t j = 0; j < k_prune; ++j)
                ps.push_back(tree.position_of(static_cast<std::uint32_t>(row[j])));
            std::sort(ps.begin(), ps.end());

            double acc = 0.0;
            stack.clear();
            stack.push_back(0);  // root
            while (!stack.empty()) {
                const std::int32_t id = stack.back();
                stack.pop_back();
                const auto& nd = tree.node(id);
                ++local.nodes_visited;

                if (!range_blocked(ps, nd.begin, nd.end)) {
                    const Skeleton& sk = skeletons[static_cast<std::size_t>(id)];
                    if (sk.compressible) {
                        for (std::size_t s = 0; s < sk.size(); ++s)
                            acc += kernel_eval(kernel, xi, tree.point_at(sk.point_pos[s]),
                                               sk.point_idx[s]) *
                                   sk.weights[s];
                        ++local.nodes_pruned;
                        local.skeleton_interactions += sk.size();
                        if (audit) {
                            audit->pruned_points[ti] += nd.count();
                            audit->pruned_ranges[ti].emplace_back(nd.begin, nd.end);
                        }
                        continue;
                    }
                    ++local.missing_skeleton_blocks;
                }

                if (nd.is_leaf()) {
                    for (std::uint32_t pos = nd.begin; pos < nd.end; ++pos) {
                        if (!cfg.include_self && pos == self_pos) continue;
                        acc += kernel_eval(kernel, xi, tree.point_at(pos), tree.original_of(pos)) *
                               wpos[pos];
                        ++local.direct_interactions;
                    }
                    if (audit) audit->direct_count[ti] += nd.count();
                } else {
                    stack.push_back(nd.right);  // left child processed first
                    stack.push_back(nd.left);
                }
            }
            u[ti] = acc;
        }
#pragma omp critical
        {
            total.nodes_visited += local.nodes_visited;
            total.nodes_pruned += local.nodes_pruned;
            total.direct_interactions += local.direct_interactions;
            total.skeleton_interactions += local.skeleton_interactions;
            total.missing_skeleton_blocks += local.missing_skeleton_blocks;
        }
    }
    total.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (stats) *stats = total;
    return u;
}

double relative_error(const PotentialVector& approx, const PotentialVector& exact) {
    if (approx.size() != exact.size())
        throw std::invalid_argument("relative_error: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        const double d = approx[i] - exact[i];
        num += d * d;
        den += exact[i] * exact[i];
    }
    if (den == 0.0) throw std::domain_error("relative_error: exact vector has zero norm");
    return std::sqrt(num / den);
}

double relative_error(const PotentialVector& approx, const PotentialVector& exact,
                      std::span<const std::uint32_t> sample) {
    if (approx.size() != exact.size())
        throw std::invalid_argument("relative_error: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::uint32_t i : sample) {
        if (i >= exact.size()) throw std::out_of_range("relative_error: sample index out of range");
        const double d = approx[i] - exact[i];
        num += d * d;
        den += exact[i] * exact[i];
    }
    if (den == 0.0) throw std::domain_error("relative_error: exact vector has zero norm");
    return std::sqrt(num / den);
}

}  // namespace treesum
