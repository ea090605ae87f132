// treesum: fast kernel summation on point clouds.
//
//   gen     synthetic manifold datasets
//   knn     build / cache a nearest-neighbor graph
//   run     full pipeline: knn -> tree -> skeletons -> evaluation + report
//   direct  exact reference sums on a target subset
//   report  reformat a saved json report

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "treesum/ann.hpp"
#include "treesum/dataset.hpp"
#include "treesum/evaluator.hpp"
#include "treesum/io.hpp"
#include "treesum/pipeline.hpp"
#include "treesum/rng.hpp"

namespace {

using namespace treesum;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << text;
}

PointSet load_points(const std::string& path, const std::string& format, std::size_t dim) {
    if (format == "csv") return read_points_csv(path);
    if (dim == 0) throw CLI::ValidationError("--dim is required for bin input");
    return read_points_bin(path, dim);
}

// Flat key=value config file for the run subcommand; keys are the long flag
// names without the dashes. Flags given on the command line win.
void apply_config_file(CLI::App* run, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        CLI::Option* opt = run->get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown config key '" + key + "'");
        if (opt->count() > 0) continue;  // explicit flag wins
        opt->add_result(value);
        opt->run_callback();
    }
}

int cmd_gen(const std::string& out, const std::string& format, std::size_t n, std::size_t dim,
            std::size_t intrinsic, double noise, const std::string& map, std::uint64_t seed,
            const std::string& weights_out) {
    const auto m = manifold_map_from_string(map);
    PointSet pts = generate_manifold_dataset(n, dim, intrinsic == 0 ? dim : intrinsic, noise,
                                             seed, m);
    if (format == "csv")
        write_points_csv(out, pts);
    else
        write_points_bin(out, pts);
    if (!weights_out.empty()) write_value_lines(weights_out, generate_weights(n, seed));
    std::fprintf(stderr, "wrote %zu points in d=%zu to %s\n", pts.size(), pts.dim(), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fast kernel summation: neighbor-pruned treecode with skeleton compression"};
    app.require_subcommand(1);

    // ---- gen ----------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a synthetic manifold dataset");
    struct {
        std::string out, format = "bin", map = "sinusoidal", weights_out;
        std::size_t n = 10000, dim = 8, intrinsic = 0;
        double noise = 0.0;
        std::uint64_t seed = 42;
    } g;
    gen->add_option("--out", g.out, "output file")->required();
    gen->add_option("--format", g.format, "bin | csv")->check(CLI::IsMember({"bin", "csv"}));
    gen->add_option("--n", g.n, "number of points");
    gen->add_option("--dim", g.dim, "ambient dimension");
    gen->add_option("--intrinsic-dim", g.intrinsic, "latent dimension (default: ambient)");
    gen->add_option("--noise", g.noise, "isotropic Gaussian noise scale");
    gen->add_option("--map", g.map, "identity | linear | sinusoidal");
    gen->add_option("--seed", g.seed, "rng seed");
    gen->add_option("--weights-out", g.weights_out, "also write standard-normal weights");

    // ---- knn ----------------------------------------------------------
    auto* knn = app.add_subcommand("knn", "build and cache a k-nearest-neighbor graph");
    struct {
        std::string input, format = "bin", method = "greedy", out;
        std::size_t dim = 0, k = 16, num_trees = 8, ann_leaf_size = 64;
        std::uint64_t seed = 42;
        int threads = 0;
    } kn;
    knn->add_option("--input", kn.input, "points file")->required();
    knn->add_option("--format", kn.format, "bin | csv")->check(CLI::IsMember({"bin", "csv"}));
    knn->add_option("--dim", kn.dim, "dimension (bin input)");
    knn->add_option("--k", kn.k, "neighbors per point");
    knn->add_option("--num-trees", kn.num_trees, "projection trees for the greedy search");
    knn->add_option("--ann-leaf-size", kn.ann_leaf_size, "projection-tree leaf size");
    knn->add_option("--ann-method", kn.method, "greedy | exact")
        ->check(CLI::IsMember({"greedy", "exact"}));
    knn->add_option("--seed", kn.seed, "rng seed");
    knn->add_option("--threads", kn.threads, "thread cap (0 = all)");
    knn->add_option("--out", kn.out, "cache file to write")->required();

    // ---- run ----------------------------------------------------------
    auto* run = app.add_subcommand("run", "full pipeline with accuracy/timing report");
    RunConfig rc;
    std::string config_path, report_format = "human", report_out;
    run->add_option("--config", config_path, "flat key=value config file; flags win");
    run->add_option("--input", rc.input_path, "points file")->required();
    run->add_option("--format", rc.input_format, "bin | csv")
        ->check(CLI::IsMember({"bin", "csv"}));
    run->add_option("--dim", rc.dim, "dimension (bin input)");
    run->add_option("--weights", rc.weights_path, "weights file, one value per line");
    run->add_option("--kernel", rc.kernel, "gaussian | gaussian-variable | reciprocal");
    run->add_option("--sigma", rc.sigma, "gaussian bandwidth");
    run->add_option("--sigma-file", rc.sigma_file, "per-source bandwidths");
    run->add_option("--sigma-median-sample", rc.sigma_median_sample,
                    "set sigma to the median pairwise distance of this many points");
    run->add_option("--epsilon", rc.epsilon, "reciprocal kernel regularizer");
    run->add_option("--k", rc.k, "neighbors per point");
    run->add_option("--num-trees", rc.num_trees, "projection trees");
    run->add_option("--ann-leaf-size", rc.ann_leaf_size, "projection-tree leaf size");
    run->add_option("--ann-method", rc.ann_method, "greedy | exact")
        ->check(CLI::IsMember({"greedy", "exact"}));
    run->add_option("--knn-cache", rc.knn_cache, "neighbor-graph cache path");
    run->add_option("--leaf-capacity", rc.leaf_capacity, "space-tree leaf capacity");
    run->add_option("--split-rule", rc.split_rule, "median-projection | widest-coordinate");
    run->add_option("--skeleton-size", rc.skeleton_size, "approximation rank s");
    run->add_option("--uniform-samples", rc.uniform_samples, "uniform rows added per design");
    run->add_option("--min-skeleton-level", rc.min_skeleton_level,
                    "shallowest level that builds skeletons (-1 = auto)");
    run->add_option("--row-cap", rc.row_cap, "sample-design row cap (0 = 4s + uniform)");
    run->add_option("--k-prune", rc.k_prune, "neighbors used for pruning (0 = k)");
    run->add_option("--include-self", rc.include_self, "count the j == i term");
    run->add_option("--error-sample", rc.error_sample, "targets for the direct check (0 = all)");
    run->add_option("--seed", rc.seed, "rng seed");
    run->add_option("--threads", rc.threads, "thread cap (0 = all)");
    run->add_option("--potentials-out", rc.potentials_out, "dump all potentials, binary f64");
    run->add_option("--report-format", report_format, "json | csv | human")
        ->check(CLI::IsMember({"json", "csv", "csv-row", "human"}));
    run->add_option("--report-out", report_out, "report destination (default stdout)");

    // ---- direct -------------------------------------------------------
    auto* dir = app.add_subcommand("direct", "exact sums on a target subset");
    struct {
        std::string input, format = "bin", weights, kernel = "gaussian", sigma_file, out, compare;
        std::string targets_file;
        std::size_t dim = 0, sample = 0;
        double sigma = 1.0, epsilon = 0.0;
        std::uint64_t seed = 42;
        int threads = 0;
    } dc;
    dir->add_option("--input", dc.input, "points file")->required();
    dir->add_option("--format", dc.format, "bin | csv")->check(CLI::IsMember({"bin", "csv"}));
    dir->add_option("--dim", dc.dim, "dimension (bin input)");
    dir->add_option("--weights", dc.weights, "weights file");
    dir->add_option("--kernel", dc.kernel, "gaussian | gaussian-variable | reciprocal");
    dir->add_option("--sigma", dc.sigma, "gaussian bandwidth");
    dir->add_option("--sigma-file", dc.sigma_file, "per-source bandwidths");
    dir->add_option("--epsilon", dc.epsilon, "reciprocal kernel regularizer");
    dir->add_option("--targets-file", dc.targets_file, "explicit target indices, one per line");
    dir->add_option("--sample", dc.sample, "or: sample this many targets (0 = all)");
    dir->add_option("--seed", dc.seed, "rng seed for --sample");
    dir->add_option("--threads", dc.threads, "thread cap (0 = all)");
    dir->add_option("--out", dc.out, "write sampled exact potentials, binary f64");
    dir->add_option("--compare", dc.compare,
                    "full-length potentials file to score against the exact values");

    // ---- report -------------------------------------------------------
    auto* rep = app.add_subcommand("report", "reformat a saved json report");
    struct {
        std::string in, format = "human", out;
        bool header = false;
    } rp;
    rep->add_option("--in", rp.in, "report json file")->required();
    rep->add_option("--format", rp.format, "json | csv | human")
        ->check(CLI::IsMember({"json", "csv", "csv-row", "human"}));
    rep->add_option("--out", rp.out, "destination (default stdout)");
    rep->add_flag("--header", rp.header, "prefix the csv header line");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen(g.out, g.format, g.n, g.dim, g.intrinsic, g.noise, g.map, g.seed,
                           g.weights_out);

        if (knn->parsed()) {
            PointSet pts = load_points(kn.input, kn.format, kn.dim);
            KnnGraph graph = kn.method == "exact"
                                 ? knn_exact(pts, kn.k, kn.threads)
                                 : knn_greedy(pts, kn.k, kn.num_trees, kn.ann_leaf_size, kn.seed,
                                              kn.threads);
            save_knn(kn.out, graph);
            std::fprintf(stderr, "wrote %zu x %zu neighbor graph to %s\n", graph.n, graph.k,
                         kn.out.c_str());
            return 0;
        }

        if (run->parsed()) {
            if (!config_path.empty()) apply_config_file(run, config_path);
            RunReport report = run_pipeline(rc);
            std::string text = emit_report(report, report_format == "csv" ? "csv-row"
                                                                          : report_format);
            if (report_format == "csv" || report_format == "csv-row")
                text = report_csv_header() + "\n" + text;
            write_text(report_out, text);
            return 0;
        }

        if (dir->parsed()) {
            PointSet pts = load_points(dc.input, dc.format, dc.dim);
            const std::size_t n = pts.size();
            WeightVector w =
                dc.weights.empty() ? WeightVector(n, 1.0) : read_value_lines(dc.weights);

            KernelSpec kernel;
            kernel.family = kernel_family_from_string(dc.kernel);
            kernel.sigma = dc.sigma;
            kernel.epsilon = dc.epsilon;
            if (kernel.family == KernelFamily::gaussian_variable) {
                if (dc.sigma_file.empty())
                    throw std::runtime_error("gaussian-variable requires --sigma-file");
                kernel.sigmas = read_value_lines(dc.sigma_file);
            }

            std::vector<std::uint32_t> targets;
            if (!dc.targets_file.empty()) {
                for (std::size_t v : read_index_lines(dc.targets_file))
                    targets.push_back(static_cast<std::uint32_t>(v));
            } else if (dc.sample == 0 || dc.sample >= n) {
                targets.resize(n);
                std::iota(targets.begin(), targets.end(), 0u);
            } else {
                auto rng = make_rng(dc.seed, seed_stream::error_sample);
                auto picked = sample_without_replacement(n, dc.sample, rng,
                                                         [](std::size_t) { return false; });
                targets.assign(picked.begin(), picked.end());
                std::sort(targets.begin(), targets.end());
            }

            PotentialVector exact = direct_sum(pts, w, kernel, targets, true, dc.threads);
            if (!dc.out.empty()) write_doubles_bin(dc.out, exact);

            if (!dc.compare.empty()) {
                const auto full = read_doubles_bin(dc.compare);
                if (full.size() != n)
                    throw std::runtime_error("--compare expects a full-length potential vector");
                PotentialVector approx(targets.size());
                for (std::size_t i = 0; i < targets.size(); ++i) approx[i] = full[targets[i]];
                std::printf("relative_error %.6e over %zu targets\n",
                            relative_error(approx, exact), targets.size());
            } else {
                std::fprintf(stderr, "evaluated %zu exact sums\n", targets.size());
            }
            return 0;
        }

        if (rep->parsed()) {
            std::ifstream is(rp.in);
            if (!is) throw std::runtime_error("cannot open report: " + rp.in);
            std::stringstream buf;
            buf << is.rdbuf();
            RunReport report = parse_report_json(buf.str());
            std::string text =
                emit_report(report, rp.format == "csv" ? "csv-row" : rp.format);
            if (rp.header && (rp.format == "csv" || rp.format == "csv-row"))
                text = report_csv_header() + "\n" + text;
            write_text(rp.out, text);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
