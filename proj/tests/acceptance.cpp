// End-to-end acceptance suite. Each criterion prints exactly one
// [PASS]/[FAIL] line with its key numbers; the exit code is the number of
// failures. Run a subset by listing criterion numbers as arguments.
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "treesum/dataset.hpp"
#include "treesum/evaluator.hpp"
#include "treesum/io.hpp"
#include "treesum/pipeline.hpp"
#include "treesum/rng.hpp"
#include "treesum/skeleton.hpp"

using namespace treesum;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::uint32_t> sample_targets(std::size_t n, std::size_t m, std::uint64_t seed) {
    auto rng = make_rng(seed, seed_stream::error_sample);
    auto idx = sample_without_replacement(n, m, rng, [](std::size_t) { return false; });
    std::vector<std::uint32_t> t(idx.begin(), idx.end());
    std::sort(t.begin(), t.end());
    return t;
}

PointSet random_normal_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    PointSet ps(n, d);
    for (double& v : ps.raw()) v = g(rng);
    return ps;
}

// Positive (density-style) weights for the absolute accuracy bars: signed
// weights cancel in ||u|| and turn a fixed absolute error into an arbitrarily
// large relative one.
WeightVector positive_weights(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    WeightVector w(n);
    for (double& v : w) v = u(rng);
    return w;
}

// ---------------------------------------------------------------------------
// 1. Zero-compression exactness: with every point a pruning neighbor
//    (k_prune = k = N-1) nothing is prunable, so the treecode must reproduce
//    the direct sum to floating-point reordering noise. Checked both on a
//    single-leaf tree and on a deep tree.
bool criterion1(std::string& msg) {
    const auto t0 = Clock::now();
    const std::size_t n = 4096, d = 16;
    auto pts = random_normal_points(n, d, 101);
    auto w = generate_weights(n, 101);
    KernelSpec kernel;
    kernel.family = KernelFamily::gaussian_fixed;
    kernel.sigma = 2.0;

    const auto knn = knn_exact(pts, n - 1);
    const auto targets = sample_targets(n, 512, 101);
    const auto exact = direct_sum(pts, w, kernel, targets);

    EvalConfig ec;
    ec.k_prune = n - 1;

    // single leaf: the whole sum runs through the leaf-direct path
    auto tree1 = build_space_tree(pts, n, SplitRule::median_projection, 101);
    SkeletonParams sp;
    sp.rank_s = n;
    sp.rng_seed = 101;
    auto skel1 = build_all_skeletons(tree1, knn, kernel, pts, w, sp);
    const double err1 = relative_error(treecode_eval(tree1, skel1, knn, pts, w, kernel, ec, targets),
                                       exact);

    // deep tree: every node is blocked by neighbor saturation
    auto tree2 = build_space_tree(pts, 64, SplitRule::median_projection, 101);
    SkeletonParams sp2;
    sp2.rank_s = 32;
    sp2.min_skeleton_level = static_cast<int>(tree2.depth()) + 1;  // no skeletons needed
    sp2.rng_seed = 101;
    auto skel2 = build_all_skeletons(tree2, knn, kernel, pts, w, sp2);
    EvalStats st;
    const double err2 = relative_error(
        treecode_eval(tree2, skel2, knn, pts, w, kernel, ec, targets, &st), exact);

    const double wall = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "rel_error=%.2e (single leaf), %.2e (deep tree), pruned=%llu, missing=%llu, "
                  "%.1fs",
                  err1, err2, static_cast<unsigned long long>(st.nodes_pruned),
                  static_cast<unsigned long long>(st.missing_skeleton_blocks), wall);
    msg = buf;
    return err1 <= 1e-12 && err2 <= 1e-12 && st.nodes_pruned == 0 &&
           st.missing_skeleton_blocks == 0 && wall < 10.0;
}

// ---------------------------------------------------------------------------
// 2. ID quality vs. truncated SVD on matrices with geometric spectral decay.
Eigen::MatrixXd decay_matrix(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols,
                             double ratio) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd GU(rows, cols), GV(cols, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) GU(i, j) = g(rng);
    for (Eigen::Index i = 0; i < cols; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) GV(i, j) = g(rng);
    Eigen::MatrixXd U = Eigen::HouseholderQR<Eigen::MatrixXd>(GU).householderQ() *
                        Eigen::MatrixXd::Identity(rows, cols);
    Eigen::MatrixXd V = Eigen::HouseholderQR<Eigen::MatrixXd>(GV).householderQ() *
                        Eigen::MatrixXd::Identity(cols, cols);
    Eigen::VectorXd sv(cols);
    for (Eigen::Index i = 0; i < cols; ++i) sv(i) = std::pow(ratio, static_cast<double>(i));
    return U * sv.asDiagonal() * V.transpose();
}

double id_residual(const Eigen::MatrixXd& A, const IdResult& id) {
    Eigen::MatrixXd approx(A.rows(), A.cols());
    Eigen::MatrixXd S(A.rows(), static_cast<Eigen::Index>(id.skeleton_cols.size()));
    for (std::size_t j = 0; j < id.skeleton_cols.size(); ++j) {
        S.col(static_cast<Eigen::Index>(j)) = A.col(static_cast<Eigen::Index>(id.skeleton_cols[j]));
        approx.col(static_cast<Eigen::Index>(id.skeleton_cols[j])) = S.col(static_cast<Eigen::Index>(j));
    }
    for (std::size_t t = 0; t < id.rest_cols.size(); ++t)
        approx.col(static_cast<Eigen::Index>(id.rest_cols[t])) =
            S * id.proj.col(static_cast<Eigen::Index>(t));
    return (A - approx).norm();
}

bool criterion2(std::string& msg) {
    const std::vector<std::size_t> ranks = {5, 10, 20};
    std::size_t violations = 0, comparisons = 0;
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd A = decay_matrix(2000 + trial, 80, 40, 0.5);
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues();
        for (std::size_t s : ranks) {
            const auto id = interpolative_decomposition(A, s);
            const double r_id = id_residual(A, id);
            double tail = 0.0;
            for (Eigen::Index i = static_cast<Eigen::Index>(s); i < sv.size(); ++i)
                tail += sv(i) * sv(i);
            const double r_svd = std::sqrt(tail);
            ++comparisons;
            worst = std::max(worst, r_id / r_svd);
            if (r_id > 10.0 * r_svd) ++violations;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu/%zu within 10x of truncated SVD, worst ratio %.2f",
                  comparisons - violations, comparisons, worst);
    msg = buf;
    return violations == 0;
}

// ---------------------------------------------------------------------------
// 3 + 9. High-ambient-dimension regime and the per-target accounting audit,
//        sharing one set of build artifacts.
struct HighDimRun {
    bool ready = false;
    double err = 1.0, t_eval = 0.0, t_direct_extrap = 0.0, wall = 0.0;
    std::size_t audit_violations = 0, audited = 0;
    std::uint64_t n = 0;
};

HighDimRun run_highdim() {
    HighDimRun out;
    const auto t0 = Clock::now();
    const std::size_t n = 20000, d = 1000;
    auto pts = generate_manifold_dataset(n, d, 4, 0.0, 303);
    auto w = positive_weights(n, 303);
    KernelSpec kernel;
    kernel.family = KernelFamily::gaussian_fixed;
    kernel.sigma = median_pairwise_distance(pts, 1000, 303);

    const auto knn = knn_greedy(pts, 32, 8, 64, 303);
    const auto tree = build_space_tree(pts, 256, SplitRule::median_projection, 303);
    SkeletonParams sp;
    sp.rank_s = 256;
    sp.rng_seed = 303;
    const auto skeletons = build_all_skeletons(tree, knn, kernel, pts, w, sp);

    std::vector<std::uint32_t> all(n);
    std::iota(all.begin(), all.end(), 0u);
    EvalConfig ec;
    auto te = Clock::now();
    const auto u = treecode_eval(tree, skeletons, knn, pts, w, kernel, ec, all);
    out.t_eval = seconds_since(te);

    const auto targets = sample_targets(n, 1000, 303);
    te = Clock::now();
    const auto exact = direct_sum(pts, w, kernel, targets);
    const double t_direct = seconds_since(te);
    out.t_direct_extrap = t_direct / 1000.0 * static_cast<double>(n);

    PotentialVector approx(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) approx[i] = u[targets[i]];
    out.err = relative_error(approx, exact);

    // audited pass over every target for the interaction decomposition
    EvalAudit audit;
    (void)treecode_eval(tree, skeletons, knn, pts, w, kernel, ec, all, nullptr, &audit);
    out.audited = n;
    for (std::size_t i = 0; i < n; ++i)
        if (audit.direct_count[i] + audit.pruned_points[i] != n) ++out.audit_violations;

    out.n = n;
    out.wall = seconds_since(t0);
    out.ready = true;
    return out;
}

bool criterion3(const HighDimRun& r, std::string& msg) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "rel_error=%.2e, eval %.1fs vs extrapolated direct %.1fs, total %.0fs", r.err,
                  r.t_eval, r.t_direct_extrap, r.wall);
    msg = buf;
    return r.err <= 1e-3 && r.t_eval < r.t_direct_extrap && r.wall < 600.0;
}

bool criterion9(const HighDimRun& r, std::string& msg) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu/%zu targets decompose direct+pruned = %llu",
                  r.audited - r.audit_violations, r.audited,
                  static_cast<unsigned long long>(r.n));
    msg = buf;
    return r.audit_violations == 0;
}

// ---------------------------------------------------------------------------
// 4. Neighbor containment across random configurations: no pruned subtree may
//    ever cover one of the target's first k_prune neighbors.
bool criterion4(std::string& msg) {
    std::mt19937_64 meta(404);
    std::size_t violations = 0, checked_targets = 0;
    for (int c = 0; c < 20; ++c) {
        const std::size_t n = 600 + meta() % 2000;
        const std::size_t d = std::vector<std::size_t>{4, 8, 16, 32}[meta() % 4];
        const std::size_t k = 4 + meta() % 13;
        const std::size_t k_prune = 1 + meta() % k;
        const std::size_t leaf = std::vector<std::size_t>{16, 32, 64}[meta() % 3];
        const std::size_t s = std::vector<std::size_t>{8, 16, 32}[meta() % 3];
        const std::uint64_t seed = meta();
        const bool exact_graph = (meta() % 2) == 0;

        auto pts = (meta() % 2) == 0
                       ? random_normal_points(n, d, seed)
                       : generate_manifold_dataset(n, d, 2 + meta() % 3, 0.01, seed);
        auto w = generate_weights(n, seed);
        KernelSpec kernel;
        kernel.family = KernelFamily::gaussian_fixed;
        kernel.sigma = 0.5 + 2.0 * std::uniform_real_distribution<double>(0, 1)(meta);

        const auto knn = exact_graph ? knn_exact(pts, k) : knn_greedy(pts, k, 8, 32, seed);
        const auto tree = build_space_tree(pts, leaf, SplitRule::median_projection, seed);
        SkeletonParams sp;
        sp.rank_s = s;
        sp.rng_seed = seed;
        const auto skeletons = build_all_skeletons(tree, knn, kernel, pts, w, sp);

        std::vector<std::uint32_t> all(n);
        std::iota(all.begin(), all.end(), 0u);
        EvalConfig ec;
        ec.k_prune = k_prune;
        EvalAudit audit;
        (void)treecode_eval(tree, skeletons, knn, pts, w, kernel, ec, all, nullptr, &audit);

        for (std::size_t t = 0; t < n; ++t) {
            ++checked_targets;
            auto covered = [&](std::uint32_t pos) {
                for (const auto& [b, e] : audit.pruned_ranges[t])
                    if (pos >= b && pos < e) return true;
                return false;
            };
            if (covered(tree.position_of(static_cast<std::uint32_t>(t)))) ++violations;
            const auto row = knn.row(t);
            for (std::size_t j = 0; j < k_prune; ++j)
                if (covered(tree.position_of(static_cast<std::uint32_t>(row[j])))) ++violations;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu violations over 20 configs (%zu targets)", violations,
                  checked_targets);
    msg = buf;
    return violations == 0;
}

// ---------------------------------------------------------------------------
// 5. Variable bandwidth through the standard pipeline path.
bool criterion5(std::string& msg) {
    const std::size_t n = 10000;
    auto pts = generate_manifold_dataset(n, 8, 8, 0.0, 505, ManifoldMap::identity);
    auto w = positive_weights(n, 505);

    std::mt19937_64 rng(506);
    std::uniform_real_distribution<double> lu(std::log(0.5), std::log(2.0));
    std::vector<double> sigmas(n);
    for (double& sg : sigmas) sg = std::exp(lu(rng));
    const auto sf = std::filesystem::temp_directory_path() / "acceptance_sigmas.txt";
    write_value_lines(sf.string(), sigmas);

    RunConfig cfg;
    cfg.kernel = "gaussian-variable";
    cfg.sigma_file = sf.string();
    cfg.k = 16;
    cfg.leaf_capacity = 256;
    cfg.skeleton_size = 128;
    cfg.error_sample = 500;
    cfg.seed = 505;
    const auto rep = run_pipeline(pts, w, cfg);
    std::filesystem::remove(sf);

    char buf[160];
    std::snprintf(buf, sizeof buf, "rel_error=%.2e on %zu targets, %llu nodes pruned",
                  rep.rel_error, rep.error_sample_used,
                  static_cast<unsigned long long>(rep.stats.nodes_pruned));
    msg = buf;
    return rep.rel_error <= 1e-2 && rep.error_sample_used == 500 && rep.stats.nodes_pruned > 0;
}

// ---------------------------------------------------------------------------
// 6. ANN recall on a Gaussian mixture.
bool criterion6(std::string& msg) {
    const std::size_t n = 5000, d = 32;
    std::mt19937_64 rng(606);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<double>> centers(8, std::vector<double>(d));
    for (auto& c : centers)
        for (double& v : c) v = 2.0 * g(rng);
    PointSet pts(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = centers[i % centers.size()];
        for (std::size_t a = 0; a < d; ++a) pts.point(i)[a] = c[a] + 0.5 * g(rng);
    }

    // Leaf size scales with N so each tree contributes a comparable candidate
    // fraction (~2.5% of N, as in the 2000-point blob case at leaf 64).
    const auto exact = knn_exact(pts, 10);
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        total += knn_recall(knn_greedy(pts, 10, 8, 128, seed), exact);
    const double mean = total / 10.0;
    char buf[96];
    std::snprintf(buf, sizeof buf, "mean recall %.3f over 10 seeds", mean);
    msg = buf;
    return mean >= 0.8;
}

// ---------------------------------------------------------------------------
// 7. Accuracy is monotone in the skeleton size.
bool criterion7(std::string& msg) {
    const std::size_t n = 10000, d = 64;
    auto pts = generate_manifold_dataset(n, d, 4, 0.0, 707);
    auto w = positive_weights(n, 707);
    KernelSpec kernel;
    kernel.family = KernelFamily::gaussian_fixed;
    kernel.sigma = median_pairwise_distance(pts, 1000, 707);

    const auto targets = sample_targets(n, 500, 707);
    const auto exact = direct_sum(pts, w, kernel, targets);

    std::vector<KnnGraph> graphs;
    std::vector<SpaceTree> trees;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        graphs.push_back(knn_greedy(pts, 32, 8, 64, seed));
        trees.push_back(build_space_tree(pts, 256, SplitRule::median_projection, seed));
    }

    const std::vector<std::size_t> sizes = {8, 16, 32, 64};
    std::vector<double> med(sizes.size());
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        std::vector<double> errs;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            SkeletonParams sp;
            sp.rank_s = sizes[si];
            sp.rng_seed = seed;
            const auto skeletons =
                build_all_skeletons(trees[seed], graphs[seed], kernel, pts, w, sp);
            EvalConfig ec;
            ec.k_prune = 8;
            const auto u = treecode_eval(trees[seed], skeletons, graphs[seed], pts, w, kernel, ec,
                                         targets);
            errs.push_back(relative_error(u, exact));
        }
        std::nth_element(errs.begin(), errs.begin() + 4, errs.end());
        med[si] = errs[4];  // lower median of 10
    }

    bool monotone = true;
    for (std::size_t i = 1; i < med.size(); ++i)
        if (med[i] > med[i - 1]) monotone = false;
    const bool big_gain = med.back() <= med.front() / 5.0;
    char buf[200];
    std::snprintf(buf, sizeof buf, "median err s=8:%.2e s=16:%.2e s=32:%.2e s=64:%.2e", med[0],
                  med[1], med[2], med[3]);
    msg = buf;
    return monotone && big_gain;
}

// ---------------------------------------------------------------------------
// 8. Determinism: reruns are bit-identical and thread count is invisible.
bool criterion8(std::string& msg) {
    const std::size_t n = 4000;
    auto pts = generate_manifold_dataset(n, 16, 3, 0.0, 808);
    auto w = generate_weights(n, 808);
    KernelSpec kernel;
    kernel.family = KernelFamily::gaussian_fixed;
    kernel.sigma = median_pairwise_distance(pts, 500, 808);

    auto run = [&](int threads) {
        const auto knn = knn_greedy(pts, 16, 8, 64, 808, threads);
        const auto tree = build_space_tree(pts, 128, SplitRule::median_projection, 808);
        SkeletonParams sp;
        sp.rank_s = 48;
        sp.rng_seed = 808;
        sp.threads = threads;
        const auto skeletons = build_all_skeletons(tree, knn, kernel, pts, w, sp);
        std::vector<std::uint32_t> all(n);
        std::iota(all.begin(), all.end(), 0u);
        EvalConfig ec;
        ec.threads = threads;
        return treecode_eval(tree, skeletons, knn, pts, w, kernel, ec, all);
    };

    const auto u_st1 = run(1);
    const auto u_st2 = run(1);
    const auto u_mt = run(4);

    std::size_t rerun_diffs = 0, thread_diffs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (u_st1[i] != u_st2[i]) ++rerun_diffs;
        if (u_st1[i] != u_mt[i]) ++thread_diffs;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%zu rerun diffs, %zu single-vs-4-thread diffs over %zu potentials", rerun_diffs,
                  thread_diffs, n);
    msg = buf;
    return rerun_diffs == 0 && thread_diffs == 0;
}

const char* kNames[10] = {
    nullptr,
    "zero-compression exactness",
    "ID residual within 10x of truncated SVD",
    "high-ambient-dimension accuracy and speedup",
    "neighbor containment under pruning",
    "variable-bandwidth accuracy",
    "ANN recall on a Gaussian mixture",
    "accuracy monotone in skeleton size",
    "bit-identical determinism",
    "per-target interaction accounting",
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> select;
    for (int i = 1; i < argc; ++i) select.insert(std::atoi(argv[i]));
    auto wanted = [&](int c) { return select.empty() || select.count(c) > 0; };

    int failures = 0;
    HighDimRun hd;
    auto report = [&](int c, bool ok, const std::string& msg) {
        std::printf("[%s] %d. %s: %s\n", ok ? "PASS" : "FAIL", c, kNames[c], msg.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    };
    auto run_one = [&](int c, bool (*fn)(std::string&)) {
        if (!wanted(c)) return;
        std::string msg;
        bool ok = false;
        try {
            ok = fn(msg);
        } catch (const std::exception& e) {
            msg = std::string("exception: ") + e.what();
        }
        report(c, ok, msg);
    };

    run_one(1, criterion1);
    run_one(2, criterion2);
    if (wanted(3) || wanted(9)) {
        std::string msg;
        try {
            hd = run_highdim();
        } catch (const std::exception& e) {
            msg = std::string("exception: ") + e.what();
        }
        if (wanted(3)) {
            bool ok = hd.ready && criterion3(hd, msg);
            report(3, ok, msg);
        }
    }
    run_one(4, criterion4);
    run_one(5, criterion5);
    run_one(6, criterion6);
    run_one(7, criterion7);
    run_one(8, criterion8);
    if (wanted(9)) {
        std::string msg = "skipped: setup failed";
        bool ok = hd.ready && criterion9(hd, msg);
        report(9, ok, msg);
    }

    std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
