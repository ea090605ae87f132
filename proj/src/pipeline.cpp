#include "treesum/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "treesum/ann.hpp"
#include "treesum/io.hpp"
#include "treesum/rng.hpp"
#include "treesum/skeleton.hpp"
#include "treesum/space_tree.hpp"

namespace treesum {

namespace {

using json = nlohmann::ordered_json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
auto phase(const char* name, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("[") + name + "] " + e.what());
    }
}

std::vector<std::uint32_t> pick_error_sample(std::size_t n, std::size_t want, std::uint64_t seed) {
    std::vector<std::uint32_t> sample;
    if (want == 0 || want >= n) {
        sample.resize(n);
        std::iota(sample.begin(), sample.end(), 0u);
        return sample;
    }
    auto rng = make_rng(seed, seed_stream::error_sample);
    auto picked = sample_without_replacement(n, want, rng, [](std::size_t) { return false; });
    sample.assign(picked.begin(), picked.end());
    std::sort(sample.begin(), sample.end());
    return sample;
}

}  // namespace

void RunConfig::validate() const {
    if (input_format != "bin" && input_format != "csv")
        throw std::invalid_argument("input_format must be bin or csv");
    if (kernel != "gaussian" && kernel != "gaussian-fixed" && kernel != "gaussian-variable" &&
        kernel != "reciprocal" && kernel != "laplace-reciprocal")
        throw std::invalid_argument("unknown kernel family: " + kernel);
    if (sigma <= 0.0 && sigma_file.empty() && sigma_median_sample == 0)
        throw std::invalid_argument("sigma must be positive");
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (num_trees < 1) throw std::invalid_argument("num_trees must be >= 1");
    if (ann_leaf_size < 2) throw std::invalid_argument("ann_leaf_size must be >= 2");
    if (ann_method != "greedy" && ann_method != "exact")
        throw std::invalid_argument("ann_method must be greedy or exact");
    if (leaf_capacity < 1) throw std::invalid_argument("leaf_capacity must be >= 1");
    split_rule_from_string(split_rule);  // throws on bad value
    if (skeleton_size < 1) throw std::invalid_argument("skeleton_size must be >= 1");
    if (k_prune > k) throw std::invalid_argument("k_prune must be <= k");
    if (threads < 0) throw std::invalid_argument("threads must be >= 0");
}

double median_pairwise_distance(const PointSet& points, std::size_t sample_size,
                                std::uint64_t seed) {
    const std::size_t n = points.size();
    if (n < 2) throw std::invalid_argument("median_pairwise_distance: need at least 2 points");
    const std::size_t m = std::min(sample_size < 2 ? n : sample_size, n);

    std::vector<std::uint32_t> idx;
    if (m == n) {
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), 0u);
    } else {
        auto rng = make_rng(seed, seed_stream::sigma_sample);
        auto picked = sample_without_replacement(n, m, rng, [](std::size_t) { return false; });
        idx.assign(picked.begin(), picked.end());
        std::sort(idx.begin(), idx.end());
    }

    std::vector<double> d2;
    d2.reserve(m * (m - 1) / 2);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
            d2.push_back(squared_distance(points.point(idx[a]), points.point(idx[b])));
    const std::size_t mid = (d2.size() - 1) / 2;  // lower median
    std::nth_element(d2.begin(), d2.begin() + mid, d2.end());
    return std::sqrt(d2[mid]);
}

RunReport run_pipeline(const PointSet& points, const WeightVector& weights, const RunConfig& cfg) {
    phase("config", [&] { cfg.validate(); });
    phase("input", [&] {
        points.validate();
        validate_weights(weights, points.size());
    });

    const std::size_t n = points.size();
    RunReport rep;
    rep.config = cfg;
    rep.n = n;
    rep.d = points.dim();

    // resolve the kernel
    KernelSpec kernel;
    kernel.family = kernel_family_from_string(cfg.kernel);
    kernel.epsilon = cfg.epsilon;
    if (kernel.family == KernelFamily::gaussian_variable) {
        phase("kernel", [&] {
            if (cfg.sigma_file.empty())
                throw std::invalid_argument("gaussian-variable requires sigma_file");
            kernel.sigmas = read_value_lines(cfg.sigma_file);
        });
        rep.sigma_used = 0.0;
    } else {
        kernel.sigma = cfg.sigma;
        if (cfg.sigma_median_sample > 0 && kernel.family == KernelFamily::gaussian_fixed)
            kernel.sigma = phase("kernel", [&] {
                return median_pairwise_distance(points, cfg.sigma_median_sample, cfg.seed);
            });
        rep.sigma_used = kernel.sigma;
    }
    phase("kernel", [&] { kernel.validate(n); });

    // neighbor graph
    auto t0 = std::chrono::steady_clock::now();
    KnnGraph knn = phase("ann", [&] {
        if (!cfg.knn_cache.empty() && std::filesystem::exists(cfg.knn_cache)) {
            KnnGraph g = load_knn(cfg.knn_cache);
            if (g.n != n || g.k < cfg.k)
                throw std::runtime_error("knn cache does not match this dataset/config");
            return g;
        }
        KnnGraph g = cfg.ann_method == "exact"
                         ? knn_exact(points, cfg.k, cfg.threads)
                         : knn_greedy(points, cfg.k, cfg.num_trees, cfg.ann_leaf_size, cfg.seed,
                                      cfg.threads);
        if (!cfg.knn_cache.empty()) save_knn(cfg.knn_cache, g);
        return g;
    });
    rep.t_ann = seconds_since(t0);

    // space partitioning tree
    t0 = std::chrono::steady_clock::now();
    SpaceTree tree = phase("tree", [&] {
        return build_space_tree(points, cfg.leaf_capacity, split_rule_from_string(cfg.split_rule),
                                cfg.seed);
    });
    rep.t_tree = seconds_since(t0);

    // skeletons
    t0 = std::chrono::steady_clock::now();
    std::vector<Skeleton> skeletons = phase("skeleton", [&] {
        SkeletonParams sp;
        sp.rank_s = cfg.skeleton_size;
        sp.uniform_samples = cfg.uniform_samples;
        sp.min_skeleton_level = cfg.min_skeleton_level;
        sp.row_cap = cfg.row_cap;
        sp.rng_seed = cfg.seed;
        sp.threads = cfg.threads;
        return build_all_skeletons(tree, knn, kernel, points, weights, sp);
    });
    rep.t_skeleton = seconds_since(t0);

    // treecode on every target
    std::vector<std::uint32_t> all_targets(n);
    std::iota(all_targets.begin(), all_targets.end(), 0u);
    EvalConfig ec;
    ec.k_prune = cfg.k_prune == 0 ? cfg.k : cfg.k_prune;  // cache may hold more than cfg.k
    ec.include_self = cfg.include_self;
    ec.threads = cfg.threads;
    t0 = std::chrono::steady_clock::now();
    PotentialVector u = phase("eval", [&] {
        return treecode_eval(tree, skeletons, knn, points, weights, kernel, ec, all_targets,
                             &rep.stats);
    });
    rep.t_eval = seconds_since(t0);

    if (!cfg.potentials_out.empty())
        phase("output", [&] { write_doubles_bin(cfg.potentials_out, u); });

    // exact check on the error sample
    const auto sample = pick_error_sample(n, cfg.error_sample, cfg.seed);
    rep.error_sample_used = sample.size();
    t0 = std::chrono::steady_clock::now();
    PotentialVector exact = phase("direct", [&] {
        return direct_sum(points, weights, kernel, sample, cfg.include_self, cfg.threads);
    });
    rep.t_direct_sample = seconds_since(t0);

    PotentialVector approx(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) approx[i] = u[sample[i]];
    rep.rel_error = phase("direct", [&] { return relative_error(approx, exact); });

    const double per_target_direct = rep.t_direct_sample / static_cast<double>(sample.size());
    if (rep.t_eval > 0.0)
        rep.speedup_estimate = per_target_direct * static_cast<double>(n) / rep.t_eval;
    return rep;
}

RunReport run_pipeline(const RunConfig& cfg) {
    phase("config", [&] { cfg.validate(); });
    PointSet points = phase("input", [&] {
        if (cfg.input_path.empty()) throw std::invalid_argument("input path required");
        if (cfg.input_format == "csv") return read_points_csv(cfg.input_path);
        if (cfg.dim == 0) throw std::invalid_argument("bin input requires --dim");
        return read_points_bin(cfg.input_path, cfg.dim);
    });
    WeightVector weights = phase("input", [&] {
        if (cfg.weights_path.empty()) return WeightVector(points.size(), 1.0);
        return read_value_lines(cfg.weights_path);
    });
    return run_pipeline(points, weights, cfg);
}

namespace {

json config_to_json(const RunConfig& c) {
    json j;
    j["input_path"] = c.input_path;
    j["input_format"] = c.input_format;
    j["dim"] = c.dim;
    j["weights_path"] = c.weights_path;
    j["kernel"] = c.kernel;
    j["sigma"] = c.sigma;
    j["sigma_file"] = c.sigma_file;
    j["sigma_median_sample"] = c.sigma_median_sample;
    j["epsilon"] = c.epsilon;
    j["k"] = c.k;
    j["num_trees"] = c.num_trees;
    j["ann_leaf_size"] = c.ann_leaf_size;
    j["ann_method"] = c.ann_method;
    j["knn_cache"] = c.knn_cache;
    j["leaf_capacity"] = c.leaf_capacity;
    j["split_rule"] = c.split_rule;
    j["skeleton_size"] = c.skeleton_size;
    j["uniform_samples"] = c.uniform_samples;
    j["min_skeleton_level"] = c.min_skeleton_level;
    j["row_cap"] = c.row_cap;
    j["k_prune"] = c.k_prune;
    j["include_self"] = c.include_self;
    j["error_sample"] = c.error_sample;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["potentials_out"] = c.potentials_out;
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.input_path = j.at("input_path").get<std::string>();
    c.input_format = j.at("input_format").get<std::string>();
    c.dim = j.at("dim").get<std::size_t>();
    c.weights_path = j.at("weights_path").get<std::string>();
    c.kernel = j.at("kernel").get<std::string>();
    c.sigma = j.at("sigma").get<double>();
    c.sigma_file = j.at("sigma_file").get<std::string>();
    c.sigma_median_sample = j.at("sigma_median_sample").get<std::size_t>();
    c.epsilon = j.at("epsilon").get<double>();
    c.k = j.at("k").get<std::size_t>();
    c.num_trees = j.at("num_trees").get<std::size_t>();
    c.ann_leaf_size = j.at("ann_leaf_size").get<std::size_t>();
    c.ann_method = j.at("ann_method").get<std::string>();
    c.knn_cache = j.at("knn_cache").get<std::string>();
    c.leaf_capacity = j.at("leaf_capacity").get<std::size_t>();
    c.split_rule = j.at("split_rule").get<std::string>();
    c.skeleton_size = j.at("skeleton_size").get<std::size_t>();
    c.uniform_samples = j.at("uniform_samples").get<std::size_t>();
    c.min_skeleton_level = j.at("min_skeleton_level").get<int>();
    c.row_cap = j.at("row_cap").get<std::size_t>();
    c.k_prune = j.at("k_prune").get<std::size_t>();
    c.include_self = j.at("include_self").get<bool>();
    c.error_sample = j.at("error_sample").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.threads = j.at("threads").get<int>();
    c.potentials_out = j.at("potentials_out").get<std::string>();
    return c;
}

json report_to_json(const RunReport& r) {
    json j;
    j["config"] = config_to_json(r.config);
    j["n"] = r.n;
    j["d"] = r.d;
    j["sigma_used"] = r.sigma_used;
    j["t_ann"] = r.t_ann;
    j["t_tree"] = r.t_tree;
    j["t_skeleton"] = r.t_skeleton;
    j["t_eval"] = r.t_eval;
    j["t_direct_sample"] = r.t_direct_sample;
    j["rel_error"] = r.rel_error;
    j["error_sample_used"] = r.error_sample_used;
    j["speedup_estimate"] = r.speedup_estimate;
    json s;
    s["nodes_visited"] = r.stats.nodes_visited;
    s["nodes_pruned"] = r.stats.nodes_pruned;
    s["direct_interactions"] = r.stats.direct_interactions;
    s["skeleton_interactions"] = r.stats.skeleton_interactions;
    s["missing_skeleton_blocks"] = r.stats.missing_skeleton_blocks;
    s["wall_seconds"] = r.stats.wall_seconds;
    j["stats"] = s;
    return j;
}

// csv columns: the numeric core of the report, no config echo
constexpr const char* kCsvHeader =
    "n,d,sigma_used,t_ann,t_tree,t_skeleton,t_eval,t_direct_sample,rel_error,"
    "error_sample_used,speedup_estimate,nodes_visited,nodes_pruned,direct_interactions,"
    "skeleton_interactions,missing_skeleton_blocks";

}  // namespace

std::string report_csv_header() { return kCsvHeader; }

std::string emit_report(const RunReport& report, const std::string& format) {
    if (format == "json") return report_to_json(report).dump(2) + "\n";
    if (format == "csv-row" || format == "csv") {
        std::ostringstream os;
        os.precision(17);
        os << report.n << ',' << report.d << ',' << report.sigma_used << ',' << report.t_ann << ','
           << report.t_tree << ',' << report.t_skeleton << ',' << report.t_eval << ','
           << report.t_direct_sample << ',' << report.rel_error << ',' << report.error_sample_used
           << ',' << report.speedup_estimate << ',' << report.stats.nodes_visited << ','
           << report.stats.nodes_pruned << ',' << report.stats.direct_interactions << ','
           << report.stats.skeleton_interactions << ',' << report.stats.missing_skeleton_blocks
           << '\n';
        return os.str();
    }
    if (format == "human") {
        std::ostringstream os;
        os.precision(6);
        auto line = [&os](const char* key, auto value) {
            os << "  ";
            os.width(22);
            os << std::left << key << value << '\n';
        };
        os << "run report\n";
        line("points", report.n);
        line("dimension", report.d);
        line("kernel", report.config.kernel);
        line("sigma", report.sigma_used);
        line("skeleton size", report.config.skeleton_size);
        line("k / k_prune", std::to_string(report.config.k) + " / " +
                                std::to_string(report.config.k_prune == 0 ? report.config.k
                                                                          : report.config.k_prune));
        line("ann time (s)", report.t_ann);
        line("tree time (s)", report.t_tree);
        line("skeleton time (s)", report.t_skeleton);
        line("eval time (s)", report.t_eval);
        line("direct sample (s)", report.t_direct_sample);
        line("rel error", report.rel_error);
        line("error sample", report.error_sample_used);
        line("speedup estimate", report.speedup_estimate);
        line("nodes visited", report.stats.nodes_visited);
        line("nodes pruned", report.stats.nodes_pruned);
        line("direct interactions", report.stats.direct_interactions);
        line("skeleton interactions", report.stats.skeleton_interactions);
        line("missing skeletons", report.stats.missing_skeleton_blocks);
        return os.str();
    }
    throw std::invalid_argument("emit_report: unknown format " + format);
}

RunReport parse_report_json(const std::string& text) {
    const json j = json::parse(text);
    RunReport r;
    r.config = config_from_json(j.at("config"));
    r.n = j.at("n").get<std::size_t>();
    r.d = j.at("d").get<std::size_t>();
    r.sigma_used = j.at("sigma_used").get<double>();
    r.t_ann = j.at("t_ann").get<double>();
    r.t_tree = j.at("t_tree").get<double>();
    r.t_skeleton = j.at("t_skeleton").get<double>();
    r.t_eval = j.at("t_eval").get<double>();
    r.t_direct_sample = j.at("t_direct_sample").get<double>();
    r.rel_error = j.at("rel_error").get<double>();
    r.error_sample_used = j.at("error_sample_used").get<std::size_t>();
    r.speedup_estimate = j.at("speedup_estimate").get<double>();
    const json& s = j.at("stats");
    r.stats.nodes_visited = s.at("nodes_visited").get<std::uint64_t>();
    r.stats.nodes_pruned = s.at("nodes_pruned").get<std::uint64_t>();
    r.stats.direct_interactions = s.at("direct_interactions").get<std::uint64_t>();
    r.stats.skeleton_interactions = s.at("skeleton_interactions").get<std::uint64_t>();
    r.stats.missing_skeleton_blocks = s.at("missing_skeleton_blocks").get<std::uint64_t>();
    r.stats.wall_seconds = s.at("wall_seconds").get<double>();
    return r;
}

RunReport parse_report_csv_row(const std::string& line) {
    std::istringstream is(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(is, field, ',')) fields.push_back(field);
    if (fields.size() != 16)
        throw std::invalid_argument("parse_report_csv_row: expected 16 fields, got " +
                                    std::to_string(fields.size()));
    RunReport r;
    std::size_t i = 0;
    r.n = std::stoull(fields[i++]);
    r.d = std::stoull(fields[i++]);
    r.sigma_used = std::stod(fields[i++]);
    r.t_ann = std::stod(fields[i++]);
    r.t_tree = std::stod(fields[i++]);
    r.t_skeleton = std::stod(fields[i++]);
    r.t_eval = std::stod(fields[i++]);
    r.t_direct_sample = std::stod(fields[i++]);
    r.rel_error = std::stod(fields[i++]);
    r.error_sample_used = std::stoull(fields[i++]);
    r.speedup_estimate = std::stod(fields[i++]);
    r.stats.nodes_visited = std::stoull(fields[i++]);
    r.stats.nodes_pruned = std::stoull(fields[i++]);
    r.stats.direct_interactions = std::stoull(fields[i++]);
    r.stats.skeleton_interactions = std::stoull(fields[i++]);
    r.stats.missing_skeleton_blocks = std::stoull(fields[i++]);
    return r;
}

}  // namespace treesum
