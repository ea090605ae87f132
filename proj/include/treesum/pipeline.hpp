#pragma once

#include <cstdint>
#include <string>

#include "treesum/evaluator.hpp"
#include "treesum/kernel.hpp"
#include "treesum/point_set.hpp"

namespace treesum {

/// Everything a full run needs. Every field maps 1:1 to a CLI flag and a
/// key=value config-file entry; flags win over file entries.
struct RunConfig {
    // input
    std::string input_path;
    std::string input_format = "bin";  ///< bin | csv
    std::size_t dim = 0;               ///< required for bin input
    std::string weights_path;          ///< optional; unit weights when empty

    // kernel
    std::string kernel = "gaussian";  ///< gaussian | gaussian-variable | reciprocal
    double sigma = 1.0;
    std::string sigma_file;              ///< per-source bandwidths (gaussian-variable)
    std::size_t sigma_median_sample = 0; ///< >0: sigma = median pairwise distance of a subsample
    double epsilon = 0.0;                ///< reciprocal kernel regularizer

    // neighbor graph
    std::size_t k = 16;
    std::size_t num_trees = 8;
    std::size_t ann_leaf_size = 64;
    std::string ann_method = "greedy";  ///< greedy | exact
    std::string knn_cache;              ///< load if present, else build and save

    // space tree
    std::size_t leaf_capacity = 256;
    std::string split_rule = "median-projection";  ///< median-projection | widest-coordinate

    // skeletons
    std::size_t skeleton_size = 64;
    std::size_t uniform_samples = 32;
    int min_skeleton_level = -1;  ///< -1: automatic (nodes owning > N/2 points stay exact)
    std::size_t row_cap = 0;      ///< 0: 4*skeleton_size + uniform_samples

    // evaluation
    std::size_t k_prune = 0;  ///< 0: use k
    bool include_self = true;
    std::size_t error_sample = 1000;  ///< targets for the direct-sum error check; 0 = all

    std::uint64_t seed = 42;
    int threads = 0;

    std::string potentials_out;  ///< optional dump of all N potentials, binary f64

    void validate() const;  ///< throws std::invalid_argument on bad fields
};

struct RunReport {
    RunConfig config;
    std::size_t n = 0;
    std::size_t d = 0;
    double sigma_used = 0.0;  ///< resolved bandwidth (after the median rule, if any)

    double t_ann = 0.0;
    double t_tree = 0.0;
    double t_skeleton = 0.0;
    double t_eval = 0.0;
    double t_direct_sample = 0.0;

    double rel_error = 0.0;
    std::size_t error_sample_used = 0;
    /// (per-target direct time * N) / treecode eval wall time
    double speedup_estimate = 0.0;

    EvalStats stats;
};

/// Core pipeline on in-memory data: knn -> tree -> skeletons -> treecode on
/// all N targets -> direct sum on the error sample. Any phase failure is
/// rethrown with a [phase] tag.
RunReport run_pipeline(const PointSet& points, const WeightVector& weights, const RunConfig& cfg);

/// Disk front end: loads points/weights/bandwidths per cfg, then runs.
RunReport run_pipeline(const RunConfig& cfg);

/// json: schema-stable object. csv-row: one line, see report_csv_header().
/// human: aligned table.
std::string emit_report(const RunReport& report, const std::string& format);

std::string report_csv_header();

/// Inverse of emit_report for the json and csv-row formats.
RunReport parse_report_json(const std::string& text);
RunReport parse_report_csv_row(const std::string& line);

/// Lower-median pairwise distance of a seeded subsample; the sigma heuristic.
double median_pairwise_distance(const PointSet& points, std::size_t sample_size,
                                std::uint64_t seed);

}  // namespace treesum
