#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace treesum {

/// N points in R^d, dense row-major storage. Points act as both sources and
/// targets throughout the library.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t n, std::size_t d) : n_(n), d_(d), data_(n * d, 0.0) {}
    PointSet(std::vector<double> data, std::size_t d);

    std::size_t size() const { return n_; }
    std::size_t dim() const { return d_; }

    std::span<const double> point(std::size_t i) const {
        return {data_.data() + i * d_, d_};
    }
    std::span<double> point(std::size_t i) { return {data_.data() + i * d_, d_}; }

    const std::vector<double>& raw() const { return data_; }
    std::vector<double>& raw() { return data_; }

    /// Throws std::invalid_argument on empty set or non-finite coordinates.
    void validate() const;

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> data_;
};

using WeightVector = std::vector<double>;
using PotentialVector = std::vector<double>;

/// Squared Euclidean distance. Out-of-line on purpose: a single code path
/// keeps kernel values bit-identical across every caller.
double squared_distance(std::span<const double> a, std::span<const double> b);

void validate_weights(const WeightVector& w, std::size_t n);

}  // namespace treesum
