#include "treesum/ann.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "treesum/rng.hpp"

namespace treesum {

namespace {

struct Projection {
    std::vector<double> dir;

    double project(std::span<const double> p) const {
        double s = 0.0;
        for (std::size_t i = 0; i < dir.size(); ++i) s += dir[i] * p[i];
        return s;
    }
};

Projection random_unit_direction(std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Projection pr;
    pr.dir.resize(d);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            pr.dir[i] = gauss(rng);
            norm2 += pr.dir[i] * pr.dir[i];
        }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : pr.dir) v *= inv;
    return pr;
}

struct BuildFrame {
    std::uint32_t begin, end;  // range into the work index array
    std::int32_t node;
};

}  // namespace

std::int32_t RpTree::find_leaf(std::span<const double> point) const {
    std::int32_t id = 0;
    while (!nodes[id].is_leaf()) {
        const Node& nd = nodes[id];
        double proj = 0.0;
        for (std::size_t i = 0; i < nd.direction.size(); ++i) proj += nd.direction[i] * point[i];
        id = proj <= nd.threshold ? nd.left : nd.right;
    }
    return id;
}

RpTree build_rp_tree(const PointSet& points, std::size_t leaf_size, std::uint64_t rng_seed) {
    if (leaf_size < 1) throw std::invalid_argument("build_rp_tree: leaf_size must be >= 1");
    const std::size_t n = points.size();
    if (n == 0) throw std::invalid_argument("build_rp_tree: empty point set");

    RpTree tree;
    tree.leaf_of.assign(n, -1);
    std::vector<std::uint32_t> work(n);
    std::iota(work.begin(), work.end(), 0u);
    std::vector<double> proj(n);

    std::mt19937_64 rng(rng_seed);

    tree.nodes.emplace_back();
    std::vector<BuildFrame> stack{{0u, static_cast<std::uint32_t>(n), 0}};

    while (!stack.empty()) {
        const BuildFrame fr = stack.back();
        stack.pop_back();
        const std::uint32_t count = fr.end - fr.begin;
        RpTree::Node& node = tree.nodes[fr.node];

        if (count <= leaf_size) {
            node.begin = static_cast<std::uint32_t>(tree.leaf_points.size());
            for (std::uint32_t i = fr.begin; i < fr.end; ++i) {
                tree.leaf_points.push_back(work[i]);
                tree.leaf_of[work[i]] = fr.node;
            }
            node.end = static_cast<std::uint32_t>(tree.leaf_points.size());
            continue;
        }

        Projection pr = random_unit_direction(points.dim(), rng);
        for (std::uint32_t i = fr.begin; i < fr.end; ++i)
            proj[work[i]] = pr.project(points.point(work[i]));

        // lower-median threshold; left = {proj <= thr}
        const std::uint32_t mid = fr.begin + (count - 1) / 2;
        std::nth_element(work.begin() + fr.begin, work.begin() + mid, work.begin() + fr.end,
                         [&](std::uint32_t a, std::uint32_t b) { return proj[a] < proj[b]; });
        const double thr = proj[work[mid]];
        auto split = std::partition(work.begin() + fr.begin, work.begin() + fr.end,
                                    [&](std::uint32_t a) { return proj[a] <= thr; });
        std::uint32_t left_count = static_cast<std::uint32_t>(split - (work.begin() + fr.begin));

        if (left_count == count) {
            // all projections tied at thr: balanced index split, ordered by index
            std::sort(work.begin() + fr.begin, work.begin() + fr.end);
            left_count = (count + 1) / 2;
        }

        node.direction = std::move(pr.dir);
        node.threshold = thr;
        node.left = static_cast<std::int32_t>(tree.nodes.size());
        node.right = node.left + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        const std::int32_t left_id = tree.nodes[fr.node].left;
        const std::int32_t right_id = tree.nodes[fr.node].right;
        stack.push_back({fr.begin + left_count, fr.end, right_id});
        stack.push_back({fr.begin, fr.begin + left_count, left_id});
    }
    return tree;
}

namespace {

// Selects the k best (distance, index) candidates for one point and writes
// the graph row. Candidates must not contain the point itself.
void write_row(KnnGraph& g, std::size_t i, std::vector<std::pair<double, std::uint32_t>>& cand,
               std::size_t k) {
    const std::size_t keep = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + keep, cand.end());
    for (std::size_t r = 0; r < keep; ++r) {
        g.neighbors[i * k + r] = cand[r].second;
        g.distances[i * k + r] = std::sqrt(cand[r].first);
    }
}

}  // namespace

KnnGraph knn_greedy(const PointSet& points, std::size_t k, std::size_t num_trees,
                    std::size_t leaf_size, std::uint64_t rng_seed, int threads) {
    const std::size_t n = points.size();
    if (k < 1 || k >= n) throw std::invalid_argument("knn_greedy: need 1 <= k < N");
    if (num_trees < 1) throw std::invalid_argument("knn_greedy: need at least one tree");

    std::vector<RpTree> trees(num_trees);
    for (std::size_t t = 0; t < num_trees; ++t)
        trees[t] = build_rp_tree(points, leaf_size, mix_seed(rng_seed, seed_stream::ann_tree, t));

    KnnGraph g;
    g.n = n;
    g.k = k;
    g.neighbors.assign(n * k, -1);
    g.distances.assign(n * k, 0.0);

    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel num_threads(nthreads)
    {
        std::vector<std::uint32_t> stamp(n, 0xffffffffu);
        std::vector<std::pair<double, std::uint32_t>> cand;
#pragma omp for schedule(dynamic, 64)
        for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(n); ++ip) {
            const std::size_t i = static_cast<std::size_t>(ip);
            cand.clear();
            const auto self = points.point(i);
            for (std::size_t t = 0; t < num_trees; ++t) {
                for (std::uint32_t j : trees[t].leaf_members(trees[t].leaf_of[i])) {
                    if (j == i || stamp[j] == static_cast<std::uint32_t>(ip)) continue;
                    stamp[j] = static_cast<std::uint32_t>(ip);
                    cand.emplace_back(squared_distance(self, points.point(j)), j);
                }
            }
            // tiny leaves or duplicate-heavy data can leave the union short of
            // k; top up with a deterministic scan
            for (std::uint32_t j = 0; j < n && cand.size() < k; ++j) {
                if (j == i || stamp[j] == static_cast<std::uint32_t>(ip)) continue;
                stamp[j] = static_cast<std::uint32_t>(ip);
                cand.emplace_back(squared_distance(self, points.point(j)), j);
            }
            write_row(g, i, cand, k);
        }
    }
    return g;
}

KnnGraph knn_exact(const PointSet& points, std::size_t k, int threads) {
    const std::size_t n = points.size();
    if (k < 1 || k >= n) throw std::invalid_argument("knn_exact: need 1 <= k < N");

    KnnGraph g;
    g.n = n;
    g.k = k;
    g.neighbors.assign(n * k, -1);
    g.distances.assign(n * k, 0.0);

    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel num_threads(nthreads)
    {
        std::vector<std::pair<double, std::uint32_t>> cand(n - 1);
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t ip = 0; ip < static_cast<std::ptrdiff_t>(n); ++ip) {
            const std::size_t i = static_cast<std::size_t>(ip);
            const auto self = points.point(i);
            std::size_t m = 0;
            for (std::uint32_t j = 0; j < n; ++j) {
                if (j == i) continue;
                cand[m++] = {squared_distance(self, points.point(j)), j};
            }
            write_row(g, i, cand, k);
        }
    }
    return g;
}

double knn_recall(const KnnGraph& approx, const KnnGraph& exact) {
    if (approx.n != exact.n || approx.k != exact.k)
        throw std::invalid_argument("knn_recall: graph shapes differ");
    std::size_t hits = 0;
    std::vector<std::int64_t> truth;
    for (std::size_t i = 0; i < exact.n; ++i) {
        auto t = exact.row(i);
        truth.assign(t.begin(), t.end());
        std::sort(truth.begin(), truth.end());
        for (std::int64_t j : approx.row(i))
            if (std::binary_search(truth.begin(), truth.end(), j)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(exact.n * exact.k);
}

void save_knn(const std::string& path, const KnnGraph& g) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    const std::int64_t header[2] = {static_cast<std::int64_t>(g.n), static_cast<std::int64_t>(g.k)};
    f.write(reinterpret_cast<const char*>(header), sizeof(header));
    f.write(reinterpret_cast<const char*>(g.neighbors.data()),
            static_cast<std::streamsize>(g.neighbors.size() * sizeof(std::int64_t)));
    f.write(reinterpret_cast<const char*>(g.distances.data()),
            static_cast<std::streamsize>(g.distances.size() * sizeof(double)));
    if (!f) throw std::runtime_error("short write: " + path);
}

KnnGraph load_knn(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::int64_t header[2];
    f.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!f || header[0] < 1 || header[1] < 1)
        throw std::runtime_error("bad knn cache header: " + path);
    KnnGraph g;
    g.n = static_cast<std::size_t>(header[0]);
    g.k = static_cast<std::size_t>(header[1]);
    g.neighbors.resize(g.n * g.k);
    g.distances.resize(g.n * g.k);
    f.read(reinterpret_cast<char*>(g.neighbors.data()),
           static_cast<std::streamsize>(g.neighbors.size() * sizeof(std::int64_t)));
    f.read(reinterpret_cast<char*>(g.distances.data()),
           static_cast<std::streamsize>(g.distances.size() * sizeof(double)));
    if (!f) throw std::runtime_error("truncated knn cache: " + path);
    return g;
}

}  // namespace treesum
