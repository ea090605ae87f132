#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treesum/point_set.hpp"

namespace treesum {

// Point data on disk: headerless little-endian float64, row-major N x d
// (dimension supplied out of band), or CSV with one point per row.
PointSet read_points_bin(const std::string& path, std::size_t d);
PointSet read_points_csv(const std::string& path);
void write_points_bin(const std::string& path, const PointSet& pts);
void write_points_csv(const std::string& path, const PointSet& pts);

// Weights / sigma files: one value per line, text.
std::vector<double> read_value_lines(const std::string& path);
void write_value_lines(const std::string& path, const std::vector<double>& v);

// Potential vectors: raw little-endian float64.
std::vector<double> read_doubles_bin(const std::string& path);
void write_doubles_bin(const std::string& path, const std::vector<double>& v);

// Index lists: one index per line, text.
std::vector<std::size_t> read_index_lines(const std::string& path);
void write_index_lines(const std::string& path, const std::vector<std::size_t>& v);

}  // namespace treesum
